#ifndef TS2IMG_ADAM_HPP
#define TS2IMG_ADAM_HPP

#include "ts2img/tensor.hpp"

#include <cstdint>
#include <vector>

namespace ts2img {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
};

// Adam with bias correction:
//   m <- b1*m + (1-b1)*g        mhat = m / (1 - b1^t)
//   v <- b2*v + (1-b2)*g^2      vhat = v / (1 - b2^t)
//   theta <- theta - lr * mhat / (sqrt(vhat) + eps)
// One moment buffer spans all parameter tensors of the model.
template <typename S>
class Adam {
  public:
    Adam(AdamConfig cfg, const std::vector<std::vector<int>>& shapes);

    // Applies one update in place.  params/grads must match the construction
    // shapes tensor-for-tensor.
    void step(std::vector<Tensor<S>>& params, const std::vector<Tensor<S>>& grads);

    std::int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

    // Raw optimiser state, exposed so checkpoints can persist and restore it.
    Eigen::Array<S, Eigen::Dynamic, 1>& moment1() { return m_; }
    Eigen::Array<S, Eigen::Dynamic, 1>& moment2() { return v_; }
    void set_step_count(std::int64_t t);

  private:
    AdamConfig cfg_;
    std::vector<std::vector<int>> shapes_;
    std::vector<std::int64_t> offsets_;
    Eigen::Array<S, Eigen::Dynamic, 1> m_, v_;
    std::int64_t t_ = 0;
};

} // namespace ts2img

#endif
