#include "vecq/lambda_template.hpp"

#include "vecq/error.hpp"
#include "vecq/normal.hpp"
#include "vecq/quantizer.hpp"
#include "vecq/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace vecq {

namespace {

constexpr double kSolveUpper = 4.0;
constexpr double kSolveLower = 1e-4;
constexpr int kScanPoints = 600;
constexpr double kGoldenTolerance = 1e-9;
// N(0,1) mass beyond this many standard deviations underflows to zero.
constexpr double kTailCut = 40.0;

constexpr double kEmpiricalStep = 0.001;
constexpr int kEmpiricalSteps = 3000;

}  // namespace

LambdaTemplate::LambdaTemplate(std::map<int, double> entries) : entries_(std::move(entries)) {
    for (const auto& [k, lambda] : entries_) {
        if (k < 1 || k > kMaxTableBits || !(lambda > 0.0)) {
            fail(ErrorCode::InvalidArgument, "bad template entry for k=" + std::to_string(k));
        }
    }
}

const LambdaTemplate& LambdaTemplate::reference() {
    static const LambdaTemplate table({{1, 1.0},
                                       {2, 0.9957},
                                       {3, 0.5860},
                                       {4, 0.3352},
                                       {5, 0.1881},
                                       {6, 0.1041},
                                       {7, 0.0569},
                                       {8, 0.0308}});
    return table;
}

LambdaTemplate LambdaTemplate::solve() {
    std::map<int, double> entries;
    for (int k = 1; k <= kMaxTableBits; ++k) entries[k] = solve_lambda(k);
    return LambdaTemplate(std::move(entries));
}

double LambdaTemplate::tail_rule(int bits) { return 6.0 / std::ldexp(1.0, bits); }

double LambdaTemplate::at(int bits) const {
    check_bits(bits);
    if (bits > kMaxTableBits) return tail_rule(bits);
    auto it = entries_.find(bits);
    if (it == entries_.end()) {
        fail(ErrorCode::InvalidArgument, "template has no entry for k=" + std::to_string(bits));
    }
    return it->second;
}

double orientation_loss_normal(double lambda, int bits) {
    check_bits(bits);
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        fail(ErrorCode::InvalidArgument, "lambda must be positive and finite");
    }
    // Cell j holds code (j + 0.5) over (j lambda, (j + 1) lambda]; the two
    // outermost cells extend to infinity. Only cells touching [-40, 40]
    // carry representable mass.
    const double half = std::ldexp(1.0, bits - 1);
    const double j_min = -half;
    const double j_max = half - 1.0;
    const double j_lo = std::max(j_min, std::floor(-kTailCut / lambda) - 1.0);
    const double j_hi = std::min(j_max, std::ceil(kTailCut / lambda) + 1.0);

    constexpr double inf = std::numeric_limits<double>::infinity();
    double cross = 0.0;   // sum_i q_i * int t p(t) dt
    double energy = 0.0;  // sum_i q_i^2 * int p(t) dt
    for (double j = j_lo; j <= j_hi; j += 1.0) {
        const double a = (j == j_min) ? -inf : j * lambda;
        const double b = (j == j_max) ? inf : (j + 1.0) * lambda;
        const double code = j + 0.5;
        cross += code * (normal::pdf(a) - normal::pdf(b));
        energy += code * code * normal::interval_probability(a, b);
    }
    // The lambda factor of q_i cancels between numerator and denominator,
    // and E[t^2] = 1.
    return 1.0 - cross / std::sqrt(energy);
}

double solve_lambda(int bits) {
    check_bits(bits);
    if (bits == 1) return 1.0;
    if (bits > kMaxTableBits) return LambdaTemplate::tail_rule(bits);

    auto loss = [bits](double lambda) { return orientation_loss_normal(lambda, bits); };

    // Log-spaced scan to bracket the minimum, then golden-section inside it.
    std::vector<double> grid(kScanPoints);
    const double ratio = std::log(kSolveUpper / kSolveLower) / (kScanPoints - 1);
    for (int i = 0; i < kScanPoints; ++i) grid[i] = kSolveLower * std::exp(ratio * i);
    grid.back() = kSolveUpper;

    std::size_t best = 0;
    double best_loss = loss(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = loss(grid[i]);
        if (v < best_loss) {
            best_loss = v;
            best = i;
        }
    }
    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[std::min(best + 1, grid.size() - 1)];

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = loss(x1);
    double f2 = loss(x2);
    while (hi - lo > kGoldenTolerance) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = loss(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = loss(x2);
        }
    }
    return 0.5 * (lo + hi);
}

double empirical_lambda(std::span<const double> w, int bits) {
    check_bits(bits);
    const SampleStats s = stats(w);
    if (s.variance == 0.0) fail(ErrorCode::ZeroVariance, "zero variance input");
    const double sigma = s.stddev();

    std::vector<double> phi(w.begin(), w.end());
    for (double& x : phi) x /= sigma;
    std::sort(phi.begin(), phi.end());

    std::vector<double> prefix(phi.size() + 1, 0.0);
    std::partial_sum(phi.begin(), phi.end(), prefix.begin() + 1);
    const double phi_norm = norm(phi);

    // steer_value is monotone in w, so on sorted data every code occupies a
    // contiguous run and the cosine reduces to per-cell counts and sums. The
    // run boundaries come from steer_value itself, so the partition matches
    // element-wise steering exactly.
    auto orientation = [&](double lambda) {
        const double first = steer_value(phi.front(), lambda, bits);
        const double last = steer_value(phi.back(), lambda, bits);
        double cross = 0.0;
        double energy = 0.0;
        auto begin = phi.begin();
        for (double code = first; code <= last; code += 1.0) {
            auto end = std::partition_point(begin, phi.end(), [&](double x) {
                return steer_value(x, lambda, bits) <= code;
            });
            const auto i0 = static_cast<std::size_t>(begin - phi.begin());
            const auto i1 = static_cast<std::size_t>(end - phi.begin());
            cross += code * (prefix[i1] - prefix[i0]);
            energy += code * code * static_cast<double>(i1 - i0);
            begin = end;
        }
        return 1.0 - cross / (phi_norm * std::sqrt(energy));
    };

    double best_lambda = kEmpiricalStep;
    double best_loss = std::numeric_limits<double>::infinity();
    for (int g = 1; g <= kEmpiricalSteps; ++g) {
        const double lambda = g * kEmpiricalStep;
        const double v = orientation(lambda);
        if (v < best_loss) {
            best_loss = v;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

OrientationCurve curve(int bits, std::span<const double> lambda_grid) {
    if (lambda_grid.empty()) fail(ErrorCode::EmptyInput, "empty lambda grid");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > 0.0) || (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))) {
            fail(ErrorCode::InvalidArgument, "lambda grid must be positive and strictly increasing");
        }
    }
    OrientationCurve out;
    out.bits = bits;
    out.samples.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        out.samples.emplace_back(lambda, orientation_loss_normal(lambda, bits));
    }
    return out;
}

}  // namespace vecq
