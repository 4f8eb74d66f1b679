#include "ts2img/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ts2img {

template <typename S>
Adam<S>::Adam(AdamConfig cfg, const std::vector<std::vector<int>>& shapes)
    : cfg_(cfg), shapes_(shapes) {
    if (cfg_.lr <= 0.0) throw std::invalid_argument("adam: learning rate must be positive");
    if (cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 || cfg_.beta2 >= 1.0)
        throw std::invalid_argument("adam: betas must lie in [0, 1)");
    if (cfg_.eps <= 0.0) throw std::invalid_argument("adam: eps must be positive");
    std::int64_t total = 0;
    offsets_.reserve(shapes.size() + 1);
    for (const auto& s : shapes) {
        offsets_.push_back(total);
        total += numel(s);
    }
    offsets_.push_back(total);
    m_ = Eigen::Array<S, Eigen::Dynamic, 1>::Zero(total);
    v_ = Eigen::Array<S, Eigen::Dynamic, 1>::Zero(total);
}

template <typename S>
void Adam<S>::set_step_count(std::int64_t t) {
    if (t < 0) throw std::invalid_argument("adam: step count must be non-negative");
    t_ = t;
}

template <typename S>
void Adam<S>::step(std::vector<Tensor<S>>& params, const std::vector<Tensor<S>>& grads) {
    if (params.size() != shapes_.size() || grads.size() != shapes_.size())
        throw std::invalid_argument("adam: tensor count does not match construction shapes");
    ++t_;
    const S b1 = S(cfg_.beta1), b2 = S(cfg_.beta2);
    const S bc1 = S(1.0 - std::pow(cfg_.beta1, double(t_)));
    const S bc2 = S(1.0 - std::pow(cfg_.beta2, double(t_)));
    const S lr = S(cfg_.lr), eps = S(cfg_.eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].shape != shapes_[i] || grads[i].shape != shapes_[i])
            throw std::invalid_argument("adam: tensor " + std::to_string(i) + " shape " +
                                        shape_str(params[i].shape) + " does not match " +
                                        shape_str(shapes_[i]));
        const std::int64_t off = offsets_[i], len = offsets_[i + 1] - offsets_[i];
        auto m = m_.segment(off, len);
        auto v = v_.segment(off, len);
        const auto& g = grads[i].data;
        m = b1 * m + (S(1) - b1) * g;
        v = b2 * v + (S(1) - b2) * g.square();
        params[i].data -= lr * (m / bc1) / ((v / bc2).sqrt() + eps);
        ensure_finite(params[i], "adam step");
    }
}

template class Adam<float>;
template class Adam<double>;

} // namespace ts2img
