#pragma once

#include "vecq/tensor.hpp"

#include <cstddef>
#include <span>

namespace vecq {

// Welford streaming mean/variance: one pass, O(1) state.
class MomentAccumulator {
public:
    void add(double x) noexcept;
    void merge(const MomentAccumulator& other) noexcept;

    std::size_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }
    // Population variance, never negative.
    double variance() const noexcept;

private:
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Zero-mean normal prior N(0, sigma^2).
struct NormalModel {
    double sigma = 0.0;

    double pdf(double t) const;
};

NormalModel fit_normal(std::span<const double> w);

// phi = w / sigma. The mean is not removed.
WeightVector standardize(std::span<const double> w, const NormalModel& model);

// Gaussian-kernel density estimate over a fixed sample set.
class KdeModel {
public:
    KdeModel(WeightVector samples, double bandwidth);
    // Silverman's rule of thumb: h = 1.06 sigma n^(-1/5).
    static KdeModel with_silverman_bandwidth(WeightVector samples);

    double bandwidth() const noexcept { return bandwidth_; }
    std::span<const double> samples() const noexcept { return samples_; }

private:
    WeightVector samples_;
    double bandwidth_;
};

double kde_pdf(const KdeModel& model, double t);

}  // namespace vecq
