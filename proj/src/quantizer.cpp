#include "vecq/quantizer.hpp"

#include "vecq/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vecq {

double orientation_loss(std::span<const double> w_f, std::span<const double> w_q) {
    return 1.0 - cosine(w_f, w_q);
}

double modulus_loss(std::span<const double> w_f, std::span<const double> w_q) {
    if (w_f.size() != w_q.size()) fail(ErrorCode::LengthMismatch, "length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < w_f.size(); ++i) {
        const double d = w_f[i] - w_q[i];
        s += d * d;
    }
    return s;
}

void check_bits(int bits) {
    if (bits < 1 || bits > kMaxBits) {
        fail(ErrorCode::InvalidArgument,
             "bitwidth must be in [1, " + std::to_string(kMaxBits) + "], got " +
                 std::to_string(bits));
    }
}

double steer_value(double w, double lambda, int bits) {
    const double half = std::ldexp(1.0, bits - 1);
    // std::round breaks ties away from zero.
    const double level = std::clamp(std::round(w / lambda - 0.5), -half, half - 1.0);
    return level + 0.5;
}

CodeVector steer(std::span<const double> w_f, double lambda, int bits) {
    check_bits(bits);
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        fail(ErrorCode::InvalidArgument, "lambda must be positive and finite");
    }
    CodeVector out;
    out.bits = bits;
    out.codes.resize(w_f.size());
    std::transform(w_f.begin(), w_f.end(), out.codes.begin(),
                   [&](double w) { return steer_value(w, lambda, bits); });
    return out;
}

DriveResult drive(std::span<const double> w_f, const CodeVector& codes) {
    const double cc = dot(codes.codes, codes.codes);
    if (cc == 0.0) fail(ErrorCode::ZeroNorm, "cannot drive an all-zero code vector");
    DriveResult out;
    out.alpha = dot(codes.codes, w_f) / cc;
    out.reconstructed.resize(codes.size());
    std::transform(codes.codes.begin(), codes.codes.end(), out.reconstructed.begin(),
                   [&](double c) { return out.alpha * c; });
    return out;
}

QuantResult assemble_result(std::span<const double> w_f, CodeVector codes, double lambda,
                            double alpha) {
    if (codes.size() != w_f.size()) fail(ErrorCode::LengthMismatch, "length mismatch");
    QuantResult r;
    r.lambda = lambda;
    r.alpha = alpha;
    r.reconstructed.resize(codes.size());
    std::transform(codes.codes.begin(), codes.codes.end(), r.reconstructed.begin(),
                   [&](double c) { return alpha * c; });
    r.codes = std::move(codes);

    const bool f_zero = squared_norm(w_f) == 0.0;
    const bool q_zero = squared_norm(r.reconstructed) == 0.0;
    if (f_zero && q_zero) {
        r.loss_orientation = 0.0;
    } else if (f_zero || q_zero) {
        r.loss_orientation = 1.0;
    } else {
        r.loss_orientation = orientation_loss(w_f, r.reconstructed);
    }
    r.loss_modulus = modulus_loss(w_f, r.reconstructed);
    r.loss_l2 = r.loss_modulus;
    r.loss_vector = r.loss_orientation + r.loss_modulus;
    return r;
}

namespace {

QuantResult constant_input(std::span<const double> w_f, int bits) {
    // sigma = 0: a single sign code per element reconstructs the constant exactly.
    const double c = w_f.front();
    CodeVector codes;
    codes.bits = bits;
    codes.codes.assign(w_f.size(), c >= 0.0 ? 0.5 : -0.5);
    const double alpha = c >= 0.0 ? 2.0 * c : -2.0 * c;
    return assemble_result(w_f, std::move(codes), 1.0, alpha);
}

QuantResult steer_and_drive(std::span<const double> w_f, int bits, double lambda) {
    CodeVector codes = steer(w_f, lambda, bits);
    const DriveResult driven = drive(w_f, codes);
    return assemble_result(w_f, std::move(codes), lambda, driven.alpha);
}

}  // namespace

QuantResult quantize(std::span<const double> w_f, int bits, const LambdaTemplate& lambdas) {
    check_bits(bits);
    const SampleStats s = stats(w_f);
    if (s.variance == 0.0) return constant_input(w_f, bits);
    return steer_and_drive(w_f, bits, lambdas.at(bits) * s.stddev());
}

QuantResult quantize_fixed_lambda(std::span<const double> w_f, int bits, double lambda) {
    check_bits(bits);
    if (w_f.empty()) fail(ErrorCode::EmptyInput, "empty input");
    return steer_and_drive(w_f, bits, lambda);
}

QuantResult select_codes_by_orientation(std::span<const double> w_f,
                                        std::span<const double> levels,
                                        std::size_t max_candidates) {
    if (w_f.empty()) fail(ErrorCode::EmptyInput, "empty input");
    if (levels.empty()) fail(ErrorCode::InvalidArgument, "empty level set");
    if (norm(w_f) == 0.0) fail(ErrorCode::ZeroNorm, "orientation of a zero vector is undefined");

    const std::size_t d = w_f.size();
    const std::size_t base = levels.size();
    double candidates = std::pow(static_cast<double>(base), static_cast<double>(d));
    if (candidates > static_cast<double>(max_candidates)) {
        fail(ErrorCode::InvalidArgument, "too many code vectors to enumerate");
    }

    std::vector<std::size_t> digit(d, 0);
    std::vector<double> candidate(d, levels[0]);
    std::vector<double> best;
    double best_cos = -2.0;
    for (;;) {
        if (squared_norm(candidate) > 0.0) {
            const double c = cosine(w_f, candidate);
            if (c > best_cos) {
                best_cos = c;
                best = candidate;
            }
        }
        std::size_t pos = 0;
        while (pos < d && ++digit[pos] == base) {
            digit[pos] = 0;
            candidate[pos] = levels[0];
            ++pos;
        }
        if (pos == d) break;
        candidate[pos] = levels[digit[pos]];
    }
    if (best.empty()) fail(ErrorCode::InvalidArgument, "level set only contains zero");

    CodeVector codes;
    codes.bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(base, 2)))));
    codes.codes = std::move(best);
    const DriveResult driven = drive(w_f, codes);
    return assemble_result(w_f, std::move(codes), 1.0, driven.alpha);
}

}  // namespace vecq
