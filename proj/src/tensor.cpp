#include "vecq/tensor.hpp"

#include "vecq/density.hpp"
#include "vecq/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vecq {

std::size_t shape_product(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t extent : shape) n *= extent;
    return n;
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    for (std::size_t extent : shape_) {
        if (extent == 0) fail(ErrorCode::InvalidArgument, "tensor extents must be positive");
    }
    if (shape_product(shape_) != data_.size()) {
        fail(ErrorCode::LengthMismatch,
             "shape product " + std::to_string(shape_product(shape_)) + " != data length " +
                 std::to_string(data_.size()));
    }
    if (!std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); })) {
        fail(ErrorCode::NonFinite, "tensor contains NaN or Inf");
    }
}

Tensor Tensor::zeros(Shape shape) {
    const std::size_t n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

WeightVector flatten(const Tensor& t) {
    if (t.empty()) fail(ErrorCode::EmptyInput, "empty input");
    return WeightVector(t.data().begin(), t.data().end());
}

Tensor unflatten(std::span<const double> v, Shape shape) {
    return Tensor(std::move(shape), std::vector<double>(v.begin(), v.end()));
}

double SampleStats::stddev() const { return std::sqrt(variance); }

SampleStats stats(std::span<const double> v) {
    if (v.empty()) fail(ErrorCode::EmptyInput, "empty input");
    MomentAccumulator acc;
    for (double x : v) acc.add(x);
    return {acc.mean(), acc.variance(), acc.count()};
}

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        fail(ErrorCode::LengthMismatch, "length mismatch: " + std::to_string(a.size()) +
                                            " vs " + std::to_string(b.size()));
    }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_norm(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b);
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) fail(ErrorCode::ZeroNorm, "cosine of a zero-norm vector");
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

}  // namespace vecq
