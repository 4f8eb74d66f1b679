#include "ts2img/layers.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <limits>

namespace ts2img {

LayerSpec LayerSpec::conv2d(int filters, int kernel, Padding padding) {
    LayerSpec s;
    s.kind = Kind::conv2d;
    s.filters = filters;
    s.kernel = kernel;
    s.padding = padding;
    s.validate();
    return s;
}
LayerSpec LayerSpec::maxpool() {
    LayerSpec s;
    s.kind = Kind::maxpool;
    return s;
}
LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = Kind::relu;
    return s;
}
LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = Kind::flatten;
    return s;
}
LayerSpec LayerSpec::dense(int units) {
    LayerSpec s;
    s.kind = Kind::dense;
    s.units = units;
    s.validate();
    return s;
}
LayerSpec LayerSpec::dropout(double rate) {
    LayerSpec s;
    s.kind = Kind::dropout;
    s.rate = rate;
    s.validate();
    return s;
}

void LayerSpec::validate() const {
    switch (kind) {
        case Kind::conv2d:
            if (filters <= 0) throw std::invalid_argument("conv2d: filter count must be positive");
            if (kernel <= 0) throw std::invalid_argument("conv2d: kernel size must be positive");
            if (padding == Padding::same && kernel % 2 == 0)
                throw std::invalid_argument("conv2d: same padding requires an odd kernel");
            break;
        case Kind::dense:
            if (units <= 0) throw std::invalid_argument("dense: unit count must be positive");
            break;
        case Kind::dropout:
            if (rate < 0.0 || rate >= 1.0)
                throw std::invalid_argument("dropout: rate must lie in [0, 1)");
            break;
        default:
            break;
    }
}

const char* LayerSpec::kind_name() const {
    switch (kind) {
        case Kind::conv2d: return "conv2d";
        case Kind::maxpool: return "maxpool";
        case Kind::relu: return "relu";
        case Kind::flatten: return "flatten";
        case Kind::dense: return "dense";
        case Kind::dropout: return "dropout";
        case Kind::softmax_ce: return "softmax_ce";
    }
    return "?";
}

std::vector<int> layer_output_shape(const LayerSpec& spec, const std::vector<int>& in) {
    spec.validate();
    switch (spec.kind) {
        case LayerSpec::Kind::conv2d: {
            if (in.size() != 3)
                throw std::invalid_argument("conv2d expects an [H,W,C] input, got " + shape_str(in));
            if (spec.padding == Padding::same) return {in[0], in[1], spec.filters};
            const int oh = in[0] - spec.kernel + 1;
            const int ow = in[1] - spec.kernel + 1;
            if (oh < 1 || ow < 1)
                throw std::invalid_argument("conv2d: kernel larger than input " + shape_str(in));
            return {oh, ow, spec.filters};
        }
        case LayerSpec::Kind::maxpool: {
            if (in.size() != 3)
                throw std::invalid_argument("maxpool expects an [H,W,C] input, got " + shape_str(in));
            if (in[0] < 2 || in[1] < 2)
                throw std::invalid_argument("maxpool: spatial size must be at least 2, got " + shape_str(in));
            return {in[0] / 2, in[1] / 2, in[2]};
        }
        case LayerSpec::Kind::relu:
        case LayerSpec::Kind::dropout:
        case LayerSpec::Kind::softmax_ce:
            return in;
        case LayerSpec::Kind::flatten: {
            std::int64_t n = numel(in);
            if (n > std::numeric_limits<int>::max())
                throw std::invalid_argument("flatten: result too large");
            return {static_cast<int>(n)};
        }
        case LayerSpec::Kind::dense: {
            if (in.size() != 1)
                throw std::invalid_argument("dense expects a flat [D] input, got " + shape_str(in));
            return {spec.units};
        }
    }
    throw std::logic_error("unknown layer kind");
}

std::vector<int> chain_output_shape(const std::vector<LayerSpec>& chain, std::vector<int> in) {
    for (const auto& spec : chain) in = layer_output_shape(spec, in);
    return in;
}

namespace {

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MapRM = Eigen::Map<RowMat<S>>;
template <typename S>
using CMapRM = Eigen::Map<const RowMat<S>>;

struct ConvDims {
    int n, h, w, cin, k, cout, pad, oh, ow;
};

ConvDims conv_dims(const std::vector<int>& in_shape, const std::vector<int>& w_shape,
                   const std::vector<int>& b_shape, Padding padding) {
    if (in_shape.size() != 4)
        throw std::invalid_argument("conv2d: input must be [N,H,W,Cin], got " + shape_str(in_shape));
    if (w_shape.size() != 4 || w_shape[0] != w_shape[1])
        throw std::invalid_argument("conv2d: weights must be [K,K,Cin,Cout], got " + shape_str(w_shape));
    if (w_shape[2] != in_shape[3])
        throw std::invalid_argument("conv2d: weight channel count " + std::to_string(w_shape[2]) +
                                    " does not match input channels " + std::to_string(in_shape[3]));
    if (b_shape.size() != 1 || b_shape[0] != w_shape[3])
        throw std::invalid_argument("conv2d: bias must be [Cout], got " + shape_str(b_shape));

    ConvDims d;
    d.n = in_shape[0];
    d.h = in_shape[1];
    d.w = in_shape[2];
    d.cin = in_shape[3];
    d.k = w_shape[0];
    d.cout = w_shape[3];
    if (padding == Padding::same) {
        if (d.k % 2 == 0) throw std::invalid_argument("conv2d: same padding requires an odd kernel");
        d.pad = d.k / 2;
        d.oh = d.h;
        d.ow = d.w;
    } else {
        d.pad = 0;
        d.oh = d.h - d.k + 1;
        d.ow = d.w - d.k + 1;
        if (d.oh < 1 || d.ow < 1)
            throw std::invalid_argument("conv2d: kernel larger than input " + shape_str(in_shape));
    }
    return d;
}

// Gathers K*K*Cin patches into rows of a [N*OH*OW, K*K*Cin] matrix.
// Out-of-image taps are zero; in-image taps copy Cin-contiguous runs.
template <typename S>
void im2col(const S* in, const ConvDims& d, RowMat<S>& patches) {
    const std::int64_t rows = std::int64_t(d.n) * d.oh * d.ow;
    const int cols = d.k * d.k * d.cin;
    patches.resize(rows, cols);
    const std::size_t cbytes = sizeof(S) * static_cast<std::size_t>(d.cin);
    for (int n = 0; n < d.n; ++n) {
        for (int oh = 0; oh < d.oh; ++oh) {
            S* row0 = patches.data() + (std::int64_t(n) * d.oh + oh) * d.ow * cols;
            for (int ky = 0; ky < d.k; ++ky) {
                const int ih = oh + ky - d.pad;
                if (ih < 0 || ih >= d.h) {
                    for (int ow = 0; ow < d.ow; ++ow)
                        std::memset(row0 + std::int64_t(ow) * cols + ky * d.k * d.cin, 0,
                                    cbytes * static_cast<std::size_t>(d.k));
                    continue;
                }
                const S* src_row = in + (std::int64_t(n) * d.h + ih) * d.w * d.cin;
                for (int kx = 0; kx < d.k; ++kx) {
                    const int col_off = (ky * d.k + kx) * d.cin;
                    const int ow_lo = std::max(0, d.pad - kx);
                    const int ow_hi = std::min(d.ow - 1, d.w - 1 + d.pad - kx);
                    for (int ow = 0; ow < ow_lo; ++ow)
                        std::memset(row0 + std::int64_t(ow) * cols + col_off, 0, cbytes);
                    for (int ow = ow_hi + 1; ow < d.ow; ++ow)
                        std::memset(row0 + std::int64_t(ow) * cols + col_off, 0, cbytes);
                    for (int ow = ow_lo; ow <= ow_hi; ++ow)
                        std::memcpy(row0 + std::int64_t(ow) * cols + col_off,
                                    src_row + std::int64_t(ow + kx - d.pad) * d.cin, cbytes);
                }
            }
        }
    }
}

// Scatter-add of patch-space gradients back onto the input image.
template <typename S>
void col2im_add(const RowMat<S>& dpatches, const ConvDims& d, S* din) {
    const int cols = d.k * d.k * d.cin;
    for (int n = 0; n < d.n; ++n) {
        for (int oh = 0; oh < d.oh; ++oh) {
            const S* row0 = dpatches.data() + (std::int64_t(n) * d.oh + oh) * d.ow * cols;
            for (int ky = 0; ky < d.k; ++ky) {
                const int ih = oh + ky - d.pad;
                if (ih < 0 || ih >= d.h) continue;
                S* dst_row = din + (std::int64_t(n) * d.h + ih) * d.w * d.cin;
                for (int kx = 0; kx < d.k; ++kx) {
                    const int col_off = (ky * d.k + kx) * d.cin;
                    const int ow_lo = std::max(0, d.pad - kx);
                    const int ow_hi = std::min(d.ow - 1, d.w - 1 + d.pad - kx);
                    for (int ow = ow_lo; ow <= ow_hi; ++ow) {
                        const S* src = row0 + std::int64_t(ow) * cols + col_off;
                        S* dst = dst_row + std::int64_t(ow + kx - d.pad) * d.cin;
                        for (int c = 0; c < d.cin; ++c) dst[c] += src[c];
                    }
                }
            }
        }
    }
}

} // namespace

template <typename S>
Tensor<S> conv2d_forward(const Tensor<S>& input, const Tensor<S>& weights,
                         const Tensor<S>& bias, Padding padding) {
    const ConvDims d = conv_dims(input.shape, weights.shape, bias.shape, padding);
    Tensor<S> out({d.n, d.oh, d.ow, d.cout});

    RowMat<S> patches;
    im2col(input.data.data(), d, patches);

    const std::int64_t rows = std::int64_t(d.n) * d.oh * d.ow;
    CMapRM<S> w_m(weights.data.data(), d.k * d.k * d.cin, d.cout);
    MapRM<S> out_m(out.data.data(), rows, d.cout);
    out_m.noalias() = patches * w_m;
    out_m.rowwise() += Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>>(bias.data.data(), d.cout);

    ensure_finite(out, "conv2d_forward");
    return out;
}

template <typename S>
Conv2dGrads<S> conv2d_backward(const Tensor<S>& input, const Tensor<S>& weights,
                               Padding padding, const Tensor<S>& dout) {
    const ConvDims d = conv_dims(input.shape, weights.shape, {weights.shape[3]}, padding);
    const std::vector<int> expect{d.n, d.oh, d.ow, d.cout};
    if (dout.shape != expect)
        throw std::invalid_argument("conv2d_backward: dout shape " + shape_str(dout.shape) +
                                    " does not match " + shape_str(expect));

    const std::int64_t rows = std::int64_t(d.n) * d.oh * d.ow;
    RowMat<S> patches;
    im2col(input.data.data(), d, patches);

    Conv2dGrads<S> g{Tensor<S>(input.shape), Tensor<S>(weights.shape), Tensor<S>({d.cout})};
    CMapRM<S> dout_m(dout.data.data(), rows, d.cout);

    MapRM<S> dw_m(g.dweights.data.data(), d.k * d.k * d.cin, d.cout);
    dw_m.noalias() = patches.transpose() * dout_m;
    Eigen::Map<Eigen::Matrix<S, 1, Eigen::Dynamic>>(g.dbias.data.data(), d.cout) = dout_m.colwise().sum();

    CMapRM<S> w_m(weights.data.data(), d.k * d.k * d.cin, d.cout);
    RowMat<S> dpatches(rows, d.k * d.k * d.cin);
    dpatches.noalias() = dout_m * w_m.transpose();
    col2im_add(dpatches, d, g.dinput.data.data());

    ensure_finite(g.dinput, "conv2d_backward");
    ensure_finite(g.dweights, "conv2d_backward");
    return g;
}

template <typename S>
MaxPoolResult<S> maxpool2x2_forward(const Tensor<S>& input) {
    if (input.shape.size() != 4)
        throw std::invalid_argument("maxpool: input must be [N,H,W,C], got " + shape_str(input.shape));
    const int n = input.shape[0], h = input.shape[1], w = input.shape[2], c = input.shape[3];
    if (h < 2 || w < 2)
        throw std::invalid_argument("maxpool: spatial size must be at least 2, got " + shape_str(input.shape));
    if (input.size() > std::numeric_limits<std::int32_t>::max())
        throw std::invalid_argument("maxpool: input too large for 32-bit argmax indices");

    const int oh = h / 2, ow = w / 2;
    MaxPoolResult<S> r{Tensor<S>({n, oh, ow, c}), {}};
    r.argmax.resize(static_cast<std::size_t>(r.output.size()));

    const S* in = input.data.data();
    S* out = r.output.data.data();
    std::int64_t oidx = 0;
    for (int b = 0; b < n; ++b) {
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                const std::int64_t base = ((std::int64_t(b) * h + 2 * y) * w + 2 * x) * c;
                for (int ch = 0; ch < c; ++ch, ++oidx) {
                    std::int64_t best = base + ch;
                    S bv = in[best];
                    const std::int64_t cand[3] = {base + ch + c, base + ch + std::int64_t(w) * c,
                                                  base + ch + std::int64_t(w) * c + c};
                    for (std::int64_t k : cand) {
                        if (in[k] > bv) {
                            bv = in[k];
                            best = k;
                        }
                    }
                    out[oidx] = bv;
                    r.argmax[static_cast<std::size_t>(oidx)] = static_cast<std::int32_t>(best);
                }
            }
        }
    }
    return r;
}

template <typename S>
Tensor<S> maxpool2x2_backward(const std::vector<int>& input_shape,
                              const std::vector<std::int32_t>& argmax, const Tensor<S>& dout) {
    Tensor<S> din(input_shape);
    if (argmax.size() != static_cast<std::size_t>(dout.size()))
        throw std::invalid_argument("maxpool backward: argmax/dout length mismatch");
    const S* g = dout.data.data();
    S* d = din.data.data();
    for (std::size_t i = 0; i < argmax.size(); ++i) d[argmax[i]] += g[i];
    return din;
}

template <typename S>
Tensor<S> relu_forward(const Tensor<S>& input) {
    Tensor<S> out(input.shape);
    out.data = input.data.max(S(0));
    return out;
}

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& input, const Tensor<S>& dout) {
    if (input.shape != dout.shape)
        throw std::invalid_argument("relu backward: shape mismatch");
    Tensor<S> din(input.shape);
    din.data = (input.data > S(0)).select(dout.data, S(0));
    return din;
}

template <typename S>
Tensor<S> dense_forward(const Tensor<S>& input, const Tensor<S>& weights, const Tensor<S>& bias) {
    if (input.shape.size() != 2)
        throw std::invalid_argument("dense: input must be [N,D], got " + shape_str(input.shape));
    if (weights.shape.size() != 2 || weights.shape[0] != input.shape[1])
        throw std::invalid_argument("dense: weights " + shape_str(weights.shape) +
                                    " do not match input " + shape_str(input.shape));
    if (bias.shape.size() != 1 || bias.shape[0] != weights.shape[1])
        throw std::invalid_argument("dense: bias must be [U], got " + shape_str(bias.shape));

    const int n = input.shape[0], dsz = input.shape[1], u = weights.shape[1];
    Tensor<S> out({n, u});
    CMapRM<S> in_m(input.data.data(), n, dsz);
    CMapRM<S> w_m(weights.data.data(), dsz, u);
    MapRM<S> out_m(out.data.data(), n, u);
    out_m.noalias() = in_m * w_m;
    out_m.rowwise() += Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>>(bias.data.data(), u);
    ensure_finite(out, "dense_forward");
    return out;
}

template <typename S>
DenseGrads<S> dense_backward(const Tensor<S>& input, const Tensor<S>& weights, const Tensor<S>& dout) {
    const int n = input.shape[0], dsz = input.shape[1], u = weights.shape[1];
    if (dout.shape != std::vector<int>{n, u})
        throw std::invalid_argument("dense backward: dout shape mismatch");

    DenseGrads<S> g{Tensor<S>(input.shape), Tensor<S>(weights.shape), Tensor<S>({u})};
    CMapRM<S> in_m(input.data.data(), n, dsz);
    CMapRM<S> w_m(weights.data.data(), dsz, u);
    CMapRM<S> dout_m(dout.data.data(), n, u);

    MapRM<S>(g.dweights.data.data(), dsz, u).noalias() = in_m.transpose() * dout_m;
    Eigen::Map<Eigen::Matrix<S, 1, Eigen::Dynamic>>(g.dbias.data.data(), u) = dout_m.colwise().sum();
    MapRM<S>(g.dinput.data.data(), n, dsz).noalias() = dout_m * w_m.transpose();
    return g;
}

template <typename S>
DropoutResult<S> dropout_apply(const Tensor<S>& input, double rate, CounterRng rng, bool training) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("dropout: rate must lie in [0, 1)");

    DropoutResult<S> r{Tensor<S>(input.shape), Tensor<S>(input.shape)};
    if (!training || rate == 0.0) {
        r.output.data = input.data;
        r.mask.data.setConstant(S(1));
        return r;
    }
    const S scale = S(1.0 / (1.0 - rate));
    S* mask = r.mask.data.data();
    for (std::int64_t i = 0; i < input.size(); ++i)
        mask[i] = rng.next_double() < rate ? S(0) : scale;
    r.output.data = input.data * r.mask.data;
    return r;
}

template <typename S>
Tensor<S> dropout_backward(const Tensor<S>& mask, const Tensor<S>& dout) {
    if (mask.shape != dout.shape)
        throw std::invalid_argument("dropout backward: shape mismatch");
    Tensor<S> din(dout.shape);
    din.data = dout.data * mask.data;
    return din;
}

template <typename S>
SoftmaxCeResult<S> softmax_cross_entropy(const Tensor<S>& logits, const std::vector<int>& labels) {
    if (logits.shape.size() != 2)
        throw std::invalid_argument("softmax_ce: logits must be [N,K], got " + shape_str(logits.shape));
    const int n = logits.shape[0], k = logits.shape[1];
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("softmax_ce: need one label per row");
    for (int lab : labels)
        if (lab < 0 || lab >= k)
            throw std::invalid_argument("softmax_ce: label " + std::to_string(lab) +
                                        " outside [0," + std::to_string(k) + ")");

    SoftmaxCeResult<S> r;
    r.probs = Tensor<S>({n, k});
    r.grad_logits = Tensor<S>({n, k});
    const S* x = logits.data.data();
    S* p = r.probs.data.data();
    S* g = r.grad_logits.data.data();
    double loss = 0.0;
    const double invn = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        const S* xi = x + std::int64_t(i) * k;
        double m = xi[0];
        for (int j = 1; j < k; ++j) m = std::max<double>(m, xi[j]);
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += std::exp(double(xi[j]) - m);
        const double lse = m + std::log(sum);
        loss += lse - double(xi[labels[i]]);
        for (int j = 0; j < k; ++j) {
            const double pj = std::exp(double(xi[j]) - lse);
            p[std::int64_t(i) * k + j] = S(pj);
            g[std::int64_t(i) * k + j] = S((pj - (j == labels[i] ? 1.0 : 0.0)) * invn);
        }
    }
    r.loss = loss * invn;
    if (!std::isfinite(r.loss))
        throw std::runtime_error("softmax_ce: loss is not finite");
    return r;
}

#define TS2IMG_INSTANTIATE(S)                                                                        \
    template Tensor<S> conv2d_forward<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&,      \
                                         Padding);                                                  \
    template Conv2dGrads<S> conv2d_backward<S>(const Tensor<S>&, const Tensor<S>&, Padding,         \
                                               const Tensor<S>&);                                   \
    template MaxPoolResult<S> maxpool2x2_forward<S>(const Tensor<S>&);                              \
    template Tensor<S> maxpool2x2_backward<S>(const std::vector<int>&,                              \
                                              const std::vector<std::int32_t>&, const Tensor<S>&);  \
    template Tensor<S> relu_forward<S>(const Tensor<S>&);                                           \
    template Tensor<S> relu_backward<S>(const Tensor<S>&, const Tensor<S>&);                        \
    template Tensor<S> dense_forward<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&);      \
    template DenseGrads<S> dense_backward<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&); \
    template DropoutResult<S> dropout_apply<S>(const Tensor<S>&, double, CounterRng, bool);         \
    template Tensor<S> dropout_backward<S>(const Tensor<S>&, const Tensor<S>&);                     \
    template SoftmaxCeResult<S> softmax_cross_entropy<S>(const Tensor<S>&, const std::vector<int>&);

TS2IMG_INSTANTIATE(float)
TS2IMG_INSTANTIATE(double)
#undef TS2IMG_INSTANTIATE

} // namespace ts2img
