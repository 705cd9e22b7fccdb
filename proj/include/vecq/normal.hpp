#pragma once

namespace vecq::normal {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double pdf(double x);
double cdf(double x);
// Upper tail 1 - cdf(x), without cancellation for large x.
double sf(double x);
// P(a < X <= b) for X ~ N(0, 1); either bound may be infinite.
double interval_probability(double a, double b);

}  // namespace vecq::normal
