#include "vecq/normal.hpp"

#include <cmath>

namespace vecq::normal {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

double pdf(double x) {
    if (std::isinf(x)) return 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double interval_probability(double a, double b) {
    if (!(a < b)) return 0.0;
    // Difference of whichever tail is smaller keeps relative accuracy far
    // out in the tails.
    if (a >= 0.0) return sf(a) - sf(b);
    if (b <= 0.0) return cdf(b) - cdf(a);
    return 1.0 - cdf(a) - sf(b);
}

}  // namespace vecq::normal
