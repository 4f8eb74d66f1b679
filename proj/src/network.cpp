#include "ts2img/network.hpp"

#include <cmath>
#include <stdexcept>

namespace ts2img {

std::vector<std::vector<int>> chain_param_shapes(const std::vector<LayerSpec>& chain,
                                                 std::vector<int> in_shape) {
    std::vector<std::vector<int>> shapes;
    for (const auto& spec : chain) {
        switch (spec.kind) {
            case LayerSpec::Kind::conv2d:
                if (in_shape.size() != 3)
                    throw std::invalid_argument("conv2d expects an [H,W,C] input, got " +
                                                shape_str(in_shape));
                shapes.push_back({spec.kernel, spec.kernel, in_shape[2], spec.filters});
                shapes.push_back({spec.filters});
                break;
            case LayerSpec::Kind::dense:
                if (in_shape.size() != 1)
                    throw std::invalid_argument("dense expects a flat [D] input, got " +
                                                shape_str(in_shape));
                shapes.push_back({in_shape[0], spec.units});
                shapes.push_back({spec.units});
                break;
            default:
                break;
        }
        in_shape = layer_output_shape(spec, in_shape);
    }
    return shapes;
}

std::int64_t count_params(const std::vector<std::vector<int>>& shapes) {
    std::int64_t total = 0;
    for (const auto& s : shapes) total += numel(s);
    return total;
}

template <typename S>
std::vector<Tensor<S>> init_chain_params(const std::vector<LayerSpec>& chain,
                                         const std::vector<int>& in_shape, std::uint64_t seed,
                                         std::uint64_t tensor_index_base) {
    const auto shapes = chain_param_shapes(chain, in_shape);
    std::vector<Tensor<S>> params;
    params.reserve(shapes.size());
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const auto& shape = shapes[i];
        Tensor<S> t(shape);
        if (shape.size() > 1) {
            // Weight tensor: fan_in is everything but the output dimension.
            const std::int64_t fan_in = numel(shape) / shape.back();
            const double stddev = std::sqrt(2.0 / double(fan_in));
            CounterRng rng = CounterRng::keyed({seed, tensor_index_base + i});
            for (std::int64_t j = 0; j < t.size(); ++j)
                t.data[j] = S(stddev * rng.next_normal());
        }
        params.push_back(std::move(t));
    }
    return params;
}

namespace {

template <typename S>
Tensor<S> reshaped(const Tensor<S>& t, std::vector<int> shape) {
    Tensor<S> out(std::move(shape));
    if (out.size() != t.size())
        throw std::invalid_argument("reshape: element count mismatch");
    out.data = t.data;
    return out;
}

int params_used(const LayerSpec& spec) {
    return (spec.kind == LayerSpec::Kind::conv2d || spec.kind == LayerSpec::Kind::dense) ? 2 : 0;
}

} // namespace

template <typename S>
ChainCache<S> chain_forward(const std::vector<LayerSpec>& chain,
                            const std::vector<Tensor<S>>& params, const Tensor<S>& input,
                            const ForwardCtx& ctx) {
    ChainCache<S> cache;
    cache.layers.resize(chain.size());
    Tensor<S> x = input;
    std::size_t p = 0;
    std::uint64_t slot = ctx.slot_base;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const auto& spec = chain[i];
        auto& lc = cache.layers[i];
        lc.in_shape = x.shape;
        switch (spec.kind) {
            case LayerSpec::Kind::conv2d: {
                if (p + 2 > params.size())
                    throw std::invalid_argument("chain_forward: not enough parameter tensors");
                lc.input = x;
                x = conv2d_forward(x, params[p], params[p + 1], spec.padding);
                p += 2;
                break;
            }
            case LayerSpec::Kind::maxpool: {
                auto r = maxpool2x2_forward(x);
                lc.argmax = std::move(r.argmax);
                x = std::move(r.output);
                break;
            }
            case LayerSpec::Kind::relu: {
                lc.input = x;
                x = relu_forward(x);
                break;
            }
            case LayerSpec::Kind::flatten: {
                if (x.rank() < 2)
                    throw std::invalid_argument("flatten expects a batched input, got " +
                                                shape_str(x.shape));
                std::int64_t rest = x.size() / x.shape[0];
                x = reshaped(x, {x.shape[0], static_cast<int>(rest)});
                break;
            }
            case LayerSpec::Kind::dense: {
                if (p + 2 > params.size())
                    throw std::invalid_argument("chain_forward: not enough parameter tensors");
                lc.input = x;
                x = dense_forward(x, params[p], params[p + 1]);
                p += 2;
                break;
            }
            case LayerSpec::Kind::dropout: {
                CounterRng rng = CounterRng::keyed({ctx.seed, ctx.epoch, ctx.batch, slot});
                ++slot;
                auto r = dropout_apply(x, spec.rate, rng, ctx.training);
                lc.mask = std::move(r.mask);
                x = std::move(r.output);
                break;
            }
            case LayerSpec::Kind::softmax_ce:
                throw std::invalid_argument("softmax_ce is applied by the loss, not inside a chain");
        }
    }
    if (p != params.size())
        throw std::invalid_argument("chain_forward: parameter tensor count mismatch");
    cache.output = std::move(x);
    return cache;
}

template <typename S>
ChainGrads<S> chain_backward(const std::vector<LayerSpec>& chain,
                             const std::vector<Tensor<S>>& params, const ChainCache<S>& cache,
                             const Tensor<S>& dout) {
    if (cache.layers.size() != chain.size())
        throw std::logic_error("chain_backward: cache does not match this chain; run chain_forward first");
    if (dout.shape != cache.output.shape)
        throw std::invalid_argument("chain_backward: dout shape " + shape_str(dout.shape) +
                                    " does not match output " + shape_str(cache.output.shape));

    ChainGrads<S> grads;
    grads.dparams.resize(params.size());

    // Index of the first parameter tensor of each layer.
    std::vector<std::size_t> pbase(chain.size());
    std::size_t p = 0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        pbase[i] = p;
        p += params_used(chain[i]);
    }
    if (p != params.size())
        throw std::invalid_argument("chain_backward: parameter tensor count mismatch");

    Tensor<S> g = dout;
    for (std::size_t ri = chain.size(); ri-- > 0;) {
        const auto& spec = chain[ri];
        const auto& lc = cache.layers[ri];
        switch (spec.kind) {
            case LayerSpec::Kind::conv2d: {
                auto cg = conv2d_backward(lc.input, params[pbase[ri]], spec.padding, g);
                grads.dparams[pbase[ri]] = std::move(cg.dweights);
                grads.dparams[pbase[ri] + 1] = std::move(cg.dbias);
                g = std::move(cg.dinput);
                break;
            }
            case LayerSpec::Kind::maxpool:
                g = maxpool2x2_backward(lc.in_shape, lc.argmax, g);
                break;
            case LayerSpec::Kind::relu:
                g = relu_backward(lc.input, g);
                break;
            case LayerSpec::Kind::flatten:
                g = reshaped(g, lc.in_shape);
                break;
            case LayerSpec::Kind::dense: {
                auto dg = dense_backward(lc.input, params[pbase[ri]], g);
                grads.dparams[pbase[ri]] = std::move(dg.dweights);
                grads.dparams[pbase[ri] + 1] = std::move(dg.dbias);
                g = std::move(dg.dinput);
                break;
            }
            case LayerSpec::Kind::dropout:
                g = dropout_backward(lc.mask, g);
                break;
            case LayerSpec::Kind::softmax_ce:
                throw std::invalid_argument("softmax_ce is applied by the loss, not inside a chain");
        }
    }
    grads.dinput = std::move(g);
    return grads;
}

template <typename S>
Tensor<S> concat_channels(const std::vector<Tensor<S>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
    const auto& s0 = parts[0].shape;
    if (s0.size() != 4)
        throw std::invalid_argument("concat_channels: inputs must be [N,H,W,C]");
    int ctotal = 0;
    for (const auto& t : parts) {
        if (t.shape.size() != 4 || t.shape[0] != s0[0] || t.shape[1] != s0[1] ||
            t.shape[2] != s0[2])
            throw std::invalid_argument("concat_channels: mismatched shapes " + shape_str(s0) +
                                        " vs " + shape_str(t.shape));
        ctotal += t.shape[3];
    }
    Tensor<S> out({s0[0], s0[1], s0[2], ctotal});
    const std::int64_t pixels = std::int64_t(s0[0]) * s0[1] * s0[2];
    std::int64_t coff = 0;
    for (const auto& t : parts) {
        const int c = t.shape[3];
        for (std::int64_t px = 0; px < pixels; ++px)
            std::copy_n(t.data.data() + px * c, c, out.data.data() + px * ctotal + coff);
        coff += c;
    }
    return out;
}

template <typename S>
std::vector<Tensor<S>> split_channels(const Tensor<S>& whole,
                                      const std::vector<int>& channel_counts) {
    if (whole.shape.size() != 4)
        throw std::invalid_argument("split_channels: input must be [N,H,W,C]");
    int ctotal = 0;
    for (int c : channel_counts) ctotal += c;
    if (ctotal != whole.shape[3])
        throw std::invalid_argument("split_channels: channel counts do not sum to input channels");
    const std::int64_t pixels = std::int64_t(whole.shape[0]) * whole.shape[1] * whole.shape[2];
    std::vector<Tensor<S>> parts;
    parts.reserve(channel_counts.size());
    std::int64_t coff = 0;
    for (int c : channel_counts) {
        Tensor<S> t({whole.shape[0], whole.shape[1], whole.shape[2], c});
        for (std::int64_t px = 0; px < pixels; ++px)
            std::copy_n(whole.data.data() + px * ctotal + coff, c, t.data.data() + px * c);
        parts.push_back(std::move(t));
        coff += c;
    }
    return parts;
}

#define TS2IMG_INSTANTIATE(S)                                                                     \
    template std::vector<Tensor<S>> init_chain_params<S>(const std::vector<LayerSpec>&,          \
                                                         const std::vector<int>&, std::uint64_t, \
                                                         std::uint64_t);                         \
    template ChainCache<S> chain_forward<S>(const std::vector<LayerSpec>&,                       \
                                            const std::vector<Tensor<S>>&, const Tensor<S>&,     \
                                            const ForwardCtx&);                                  \
    template ChainGrads<S> chain_backward<S>(const std::vector<LayerSpec>&,                      \
                                             const std::vector<Tensor<S>>&,                      \
                                             const ChainCache<S>&, const Tensor<S>&);            \
    template Tensor<S> concat_channels<S>(const std::vector<Tensor<S>>&);                        \
    template std::vector<Tensor<S>> split_channels<S>(const Tensor<S>&, const std::vector<int>&);

TS2IMG_INSTANTIATE(float)
TS2IMG_INSTANTIATE(double)
#undef TS2IMG_INSTANTIATE

} // namespace ts2img
