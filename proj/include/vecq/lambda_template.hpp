#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

namespace vecq {

inline constexpr int kMaxBits = 30;
inline constexpr int kMaxTableBits = 8;

// Optimal quantization interval per bitwidth for a standard-normal source.
// Entries cover k in [1, 8]; wider bitwidths fall back to 6 / 2^k.
class LambdaTemplate {
public:
    explicit LambdaTemplate(std::map<int, double> entries);

    // Constants as published (k = 1 carries the conventional value 1).
    static const LambdaTemplate& reference();
    // Regenerated by minimizing the closed-form orientation loss.
    static LambdaTemplate solve();

    double at(int bits) const;
    double operator[](int bits) const { return at(bits); }
    const std::map<int, double>& entries() const noexcept { return entries_; }

    static double tail_rule(int bits);

private:
    std::map<int, double> entries_;
};

// J_o(lambda, k) of a N(0, 1) source quantized with steer(., lambda, k),
// evaluated with closed-form Gaussian cell moments.
double orientation_loss_normal(double lambda, int bits);

// argmin over (0, 4] of orientation_loss_normal for 2 <= k <= 8.
// k = 1 returns 1 and k > 8 returns the tail rule.
double solve_lambda(int bits);

// Exhaustive grid search of lambda in {0.001, ..., 3.000} minimizing
// 1 - cos(phi, steer(phi, lambda, k)) where phi = w / sigma(w).
double empirical_lambda(std::span<const double> w, int bits);

struct OrientationCurve {
    int bits = 0;
    std::vector<std::pair<double, double>> samples;  // (lambda, J_o)
};

OrientationCurve curve(int bits, std::span<const double> lambda_grid);

}  // namespace vecq
