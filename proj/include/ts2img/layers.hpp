#pragma once

#include "ts2img/rng.hpp"
#include "ts2img/tensor.hpp"

#include <cstdint>
#include <vector>

namespace ts2img {

enum class Padding { same, valid };

// One layer of the fixed architecture vocabulary. Kind-specific fields are
// meaningful only for their kind; validate() enforces the invariants.
struct LayerSpec {
    enum class Kind { conv2d, maxpool, relu, flatten, dense, dropout, softmax_ce };

    Kind kind = Kind::relu;
    int filters = 0;                  // conv2d
    int kernel = 0;                   // conv2d
    Padding padding = Padding::same;  // conv2d
    int units = 0;                    // dense
    double rate = 0.0;                // dropout

    static LayerSpec conv2d(int filters, int kernel, Padding padding = Padding::same);
    static LayerSpec maxpool();
    static LayerSpec relu();
    static LayerSpec flatten();
    static LayerSpec dense(int units);
    static LayerSpec dropout(double rate);

    void validate() const;
    const char* kind_name() const;
};

// Shape algebra for a single layer; input shape excludes the batch axis
// (images are [H,W,C], flattened activations are [D]). Throws on shapes the
// layer cannot accept, so predicted shapes always match realized ones.
std::vector<int> layer_output_shape(const LayerSpec& spec, const std::vector<int>& in);
std::vector<int> chain_output_shape(const std::vector<LayerSpec>& chain, std::vector<int> in);

// ---- Forward ops. Inputs carry a leading batch axis N. ----

// Cross-correlation plus bias. input [N,H,W,Cin], weights [K,K,Cin,Cout],
// bias [Cout]; "same" keeps the spatial size (K odd), "valid" shrinks it.
template <typename S>
Tensor<S> conv2d_forward(const Tensor<S>& input, const Tensor<S>& weights,
                         const Tensor<S>& bias, Padding padding);

template <typename S>
struct MaxPoolResult {
    Tensor<S> output;                 // [N, floor(H/2), floor(W/2), C]
    std::vector<std::int32_t> argmax; // flat input offset of each window max
};

// 2x2 window / stride 2; odd trailing row/column dropped.
template <typename S>
MaxPoolResult<S> maxpool2x2_forward(const Tensor<S>& input);

template <typename S>
Tensor<S> relu_forward(const Tensor<S>& input);

// input [N,D] x weights [D,U] + bias [U] -> [N,U]
template <typename S>
Tensor<S> dense_forward(const Tensor<S>& input, const Tensor<S>& weights, const Tensor<S>& bias);

template <typename S>
struct DropoutResult {
    Tensor<S> output;
    Tensor<S> mask; // kept elements hold 1/(1-rate), dropped hold 0
};

// Inverted dropout: scaling happens at training time, inference is identity.
template <typename S>
DropoutResult<S> dropout_apply(const Tensor<S>& input, double rate, CounterRng rng, bool training);

template <typename S>
struct SoftmaxCeResult {
    double loss = 0.0;       // mean over the batch
    Tensor<S> grad_logits;   // (softmax - onehot) / N
    Tensor<S> probs;         // [N,K]
};

template <typename S>
SoftmaxCeResult<S> softmax_cross_entropy(const Tensor<S>& logits, const std::vector<int>& labels);

// ---- Backward ops (gradients w.r.t. the cached forward inputs). ----

template <typename S>
struct Conv2dGrads {
    Tensor<S> dinput, dweights, dbias;
};

template <typename S>
Conv2dGrads<S> conv2d_backward(const Tensor<S>& input, const Tensor<S>& weights,
                               Padding padding, const Tensor<S>& dout);

template <typename S>
Tensor<S> maxpool2x2_backward(const std::vector<int>& input_shape,
                              const std::vector<std::int32_t>& argmax, const Tensor<S>& dout);

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& input, const Tensor<S>& dout);

template <typename S>
struct DenseGrads {
    Tensor<S> dinput, dweights, dbias;
};

template <typename S>
DenseGrads<S> dense_backward(const Tensor<S>& input, const Tensor<S>& weights, const Tensor<S>& dout);

template <typename S>
Tensor<S> dropout_backward(const Tensor<S>& mask, const Tensor<S>& dout);

} // namespace ts2img
