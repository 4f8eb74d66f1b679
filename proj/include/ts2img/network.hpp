#ifndef TS2IMG_NETWORK_HPP
#define TS2IMG_NETWORK_HPP

#include "ts2img/layers.hpp"

#include <cstdint>
#include <vector>

namespace ts2img {

// Shapes of the trainable tensors a chain owns, in layer order.
// conv2d contributes [K,K,Cin,F] weights and [F] bias; dense contributes
// [D,U] weights and [U] bias; other layers own nothing.
std::vector<std::vector<int>> chain_param_shapes(const std::vector<LayerSpec>& chain,
                                                 std::vector<int> in_shape);

std::int64_t count_params(const std::vector<std::vector<int>>& shapes);

// He-normal weights (std = sqrt(2 / fan_in)) and zero biases.  Each tensor is
// drawn from its own stream keyed by (seed, tensor_index_base + i) so the same
// seed always reproduces the same initialisation regardless of platform.
template <typename S>
std::vector<Tensor<S>> init_chain_params(const std::vector<LayerSpec>& chain,
                                         const std::vector<int>& in_shape, std::uint64_t seed,
                                         std::uint64_t tensor_index_base = 0);

// Inputs that vary per forward pass.  Dropout masks are keyed by
// (seed, epoch, batch, slot_base + slot) so a pass can be replayed exactly.
struct ForwardCtx {
    bool training = false;
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0;
    std::uint64_t batch = 0;
    std::uint64_t slot_base = 0;
};

template <typename S>
struct LayerCache {
    Tensor<S> input;                  // conv2d / relu / dense
    Tensor<S> mask;                   // dropout
    std::vector<std::int32_t> argmax; // maxpool
    std::vector<int> in_shape;        // every layer (flatten / maxpool reshape)
};

template <typename S>
struct ChainCache {
    std::vector<LayerCache<S>> layers;
    Tensor<S> output;
};

template <typename S>
struct ChainGrads {
    std::vector<Tensor<S>> dparams;
    Tensor<S> dinput;
};

// Runs the chain on a batched input ([N,H,W,C] ahead of flatten, [N,D] after)
// and keeps what the backward pass needs.
template <typename S>
ChainCache<S> chain_forward(const std::vector<LayerSpec>& chain,
                            const std::vector<Tensor<S>>& params, const Tensor<S>& input,
                            const ForwardCtx& ctx);

// Backpropagates dout through a cached forward pass.  Throws if the cache
// does not come from a forward run of the same chain.
template <typename S>
ChainGrads<S> chain_backward(const std::vector<LayerSpec>& chain,
                             const std::vector<Tensor<S>>& params, const ChainCache<S>& cache,
                             const Tensor<S>& dout);

// Channel-wise concat/split for networks with several convolutional heads.
template <typename S>
Tensor<S> concat_channels(const std::vector<Tensor<S>>& parts);

template <typename S>
std::vector<Tensor<S>> split_channels(const Tensor<S>& whole,
                                      const std::vector<int>& channel_counts);

} // namespace ts2img

#endif
