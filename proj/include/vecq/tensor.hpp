#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vecq {

// Flattened per-layer weights. Always 64-bit internally, even when the
// on-disk tensor is f32.
using WeightVector = std::vector<double>;
using Shape = std::vector<std::size_t>;

// Dense row-major array. Every element is finite and
// product(shape) == data.size().
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape);

    const Shape& shape() const noexcept { return shape_; }
    std::span<const double> data() const noexcept { return data_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t rank() const noexcept { return shape_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator[](std::size_t i) const { return data_[i]; }

private:
    Shape shape_;
    std::vector<double> data_;
};

std::size_t shape_product(const Shape& shape);

WeightVector flatten(const Tensor& t);
Tensor unflatten(std::span<const double> v, Shape shape);

struct SampleStats {
    double mean = 0.0;
    double variance = 0.0;  // population (divide by n)
    std::size_t count = 0;

    double stddev() const;
};

SampleStats stats(std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double squared_norm(std::span<const double> a);
// Clamped into [-1, 1]. Throws on a zero-norm argument.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace vecq
