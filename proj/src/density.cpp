#include "vecq/density.hpp"

#include "vecq/error.hpp"
#include "vecq/normal.hpp"

#include <cmath>

namespace vecq {

void MomentAccumulator::add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
}

void MomentAccumulator::merge(const MomentAccumulator& other) noexcept {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double n_a = static_cast<double>(count_);
    const double n_b = static_cast<double>(other.count_);
    const double n = n_a + n_b;
    const double delta = other.mean_ - mean_;
    mean_ += delta * n_b / n;
    m2_ += other.m2_ + delta * delta * n_a * n_b / n;
    count_ += other.count_;
}

double MomentAccumulator::variance() const noexcept {
    if (count_ == 0) return 0.0;
    const double v = m2_ / static_cast<double>(count_);
    return v > 0.0 ? v : 0.0;
}

double NormalModel::pdf(double t) const {
    if (!(sigma > 0.0)) fail(ErrorCode::ZeroVariance, "degenerate normal model");
    return normal::pdf(t / sigma) / sigma;
}

NormalModel fit_normal(std::span<const double> w) {
    if (w.size() < 2) fail(ErrorCode::InvalidArgument, "fit_normal needs at least two values");
    MomentAccumulator acc;
    for (double x : w) acc.add(x);
    return {std::sqrt(acc.variance())};
}

WeightVector standardize(std::span<const double> w, const NormalModel& model) {
    if (!(model.sigma > 0.0)) fail(ErrorCode::ZeroVariance, "cannot standardize with sigma = 0");
    WeightVector out(w.begin(), w.end());
    for (double& x : out) x /= model.sigma;
    return out;
}

KdeModel::KdeModel(WeightVector samples, double bandwidth)
    : samples_(std::move(samples)), bandwidth_(bandwidth) {
    if (samples_.empty()) fail(ErrorCode::EmptyInput, "empty input");
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
        fail(ErrorCode::InvalidArgument, "bandwidth must be positive");
    }
}

KdeModel KdeModel::with_silverman_bandwidth(WeightVector samples) {
    const NormalModel fit = fit_normal(samples);
    if (!(fit.sigma > 0.0)) fail(ErrorCode::ZeroVariance, "zero variance input");
    const double h = 1.06 * fit.sigma * std::pow(static_cast<double>(samples.size()), -0.2);
    return KdeModel(std::move(samples), h);
}

double kde_pdf(const KdeModel& model, double t) {
    const double h = model.bandwidth();
    double s = 0.0;
    for (double x : model.samples()) s += normal::pdf((x - t) / h);
    return s / (static_cast<double>(model.samples().size()) * h);
}

}  // namespace vecq
