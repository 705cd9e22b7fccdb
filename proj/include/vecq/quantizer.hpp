#pragma once

#include "vecq/lambda_template.hpp"
#include "vecq/tensor.hpp"

#include <span>
#include <vector>

namespace vecq {

// Quantization levels in code units. VecQ codes sit on the half-integer
// grid {-2^(k-1)+0.5, ..., 2^(k-1)-0.5}; baselines use integer levels.
struct CodeVector {
    std::vector<double> codes;
    int bits = 0;

    std::size_t size() const noexcept { return codes.size(); }
};

struct QuantResult {
    CodeVector codes;
    double lambda = 0.0;
    double alpha = 0.0;
    WeightVector reconstructed;  // alpha * codes
    double loss_orientation = 0.0;
    double loss_modulus = 0.0;
    double loss_vector = 0.0;
    double loss_l2 = 0.0;
};

struct DriveResult {
    double alpha = 0.0;
    WeightVector reconstructed;
};

double orientation_loss(std::span<const double> w_f, std::span<const double> w_q);
double modulus_loss(std::span<const double> w_f, std::span<const double> w_q);

void check_bits(int bits);

// Single-element steering: clip(round(w / lambda - 0.5)) + 0.5, with ties
// rounded away from zero.
double steer_value(double w, double lambda, int bits);
CodeVector steer(std::span<const double> w_f, double lambda, int bits);

// alpha* = <codes, w_f> / <codes, codes>; the orthogonal projection of w_f
// onto span(codes).
DriveResult drive(std::span<const double> w_f, const CodeVector& codes);

// Fills codes/alpha/reconstructed and every loss field.
QuantResult assemble_result(std::span<const double> w_f, CodeVector codes,
                            double lambda, double alpha);

// Q(w_f) = drive(steer(w_f, template[k] * sigma, k)).
QuantResult quantize(std::span<const double> w_f, int bits,
                     const LambdaTemplate& lambdas = LambdaTemplate::reference());

// Same pipeline with lambda given directly in weight units.
QuantResult quantize_fixed_lambda(std::span<const double> w_f, int bits, double lambda);

// Picks, among all code vectors drawn from `levels`, the one with minimal
// orientation loss, then drives it. Only for short vectors:
// levels.size()^d must stay below max_candidates.
QuantResult select_codes_by_orientation(std::span<const double> w_f,
                                        std::span<const double> levels,
                                        std::size_t max_candidates = 10'000'000);

}  // namespace vecq
