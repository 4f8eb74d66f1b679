#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ts2img {

inline std::int64_t numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0)
            throw std::invalid_argument("tensor dimensions must be positive, got " +
                                        std::to_string(d));
        n *= d;
    }
    return n;
}

inline std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

// Dense N-dimensional array over a flat Eigen buffer, row-major with the
// last axis fastest (images are [N,H,W,C] with channels contiguous).
// The optional grad buffer always matches data's length.
template <typename S>
struct Tensor {
    using Array = Eigen::Array<S, Eigen::Dynamic, 1>;

    std::vector<int> shape;
    Array data;
    Array grad; // size 0 until alloc_grad()

    Tensor() = default;
    explicit Tensor(std::vector<int> shp) : shape(std::move(shp)) {
        data = Array::Zero(numel(shape));
    }
    Tensor(std::vector<int> shp, Array values) : shape(std::move(shp)), data(std::move(values)) {
        if (data.size() != numel(shape))
            throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                        " does not match shape " + shape_str(shape));
    }

    static Tensor zeros(std::vector<int> shp) { return Tensor(std::move(shp)); }

    static Tensor full(std::vector<int> shp, S value) {
        Tensor t(std::move(shp));
        t.data.setConstant(value);
        return t;
    }

    static Tensor from(std::vector<int> shp, std::initializer_list<S> values) {
        Tensor t(std::move(shp));
        if (static_cast<std::int64_t>(values.size()) != t.size())
            throw std::invalid_argument("initializer length does not match shape");
        std::int64_t i = 0;
        for (S v : values) t.data[i++] = v;
        return t;
    }

    std::int64_t size() const { return data.size(); }
    int dim(std::size_t axis) const { return shape.at(axis); }
    int rank() const { return static_cast<int>(shape.size()); }

    void alloc_grad() {
        if (grad.size() != data.size()) grad = Array::Zero(data.size());
    }
    void zero_grad() {
        if (grad.size()) grad.setZero();
    }
    bool has_grad() const { return grad.size() == data.size() && data.size() > 0; }

    // Flat offset of a multi-index; bounds-checked, test/debug oriented.
    std::int64_t offset(const std::vector<int>& idx) const {
        if (idx.size() != shape.size()) throw std::invalid_argument("index rank mismatch");
        std::int64_t off = 0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            if (idx[a] < 0 || idx[a] >= shape[a])
                throw std::out_of_range("index out of range on axis " + std::to_string(a));
            off = off * shape[a] + idx[a];
        }
        return off;
    }
    S& at(const std::vector<int>& idx) { return data[offset(idx)]; }
    S at(const std::vector<int>& idx) const { return data[offset(idx)]; }

    // Converts the payload between float and double modes.
    template <typename T>
    Tensor<T> cast() const {
        Tensor<T> out(shape);
        out.data = data.template cast<T>();
        if (grad.size()) out.grad = grad.template cast<T>();
        return out;
    }
};

// NaN/Inf anywhere is an error state; `where` names the producing op.
template <typename S>
void ensure_finite(const Tensor<S>& t, const char* where) {
    if (!t.data.allFinite())
        throw std::runtime_error(std::string(where) + ": tensor contains NaN or Inf");
}

} // namespace ts2img
