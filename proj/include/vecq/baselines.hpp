#pragma once

#include "vecq/quantizer.hpp"

#include <optional>
#include <span>
#include <vector>

namespace vecq {

struct BaselineResult {
    QuantResult result;
    int iterations = 1;
    std::vector<double> l2_history;  // J_l2 after each alternating step
};

struct IterativeOptions {
    int max_iters = 1000;
    // Defaults to max|w| / (largest positive level).
    std::optional<double> initial_alpha;
    // Defaults to the integer grid {-2^(k-1), ..., 2^(k-1) - 1}.
    std::vector<double> levels;
};

std::vector<double> integer_levels(int bits);

// Alternating exact coordinate descent on ||w - alpha v||^2 over integer
// levels: v <- nearest level to w / alpha, alpha <- <v, w> / <v, v>.
BaselineResult iterative_l2(std::span<const double> w_f, int bits,
                            const IterativeOptions& options = {});

// Xnor-style: v = sign(w) with sign(0) = +1, alpha = mean |w|.
BaselineResult sign_binary(std::span<const double> w_f);

// Fixed-point rounding with alpha = max|w| / (2^(k-1) - 1).
BaselineResult linear_round(std::span<const double> w_f, int bits);

}  // namespace vecq
