#include "vecq/baselines.hpp"

#include "vecq/error.hpp"

#include <algorithm>
#include <cmath>

namespace vecq {

namespace {

double max_abs(std::span<const double> w) {
    double m = 0.0;
    for (double x : w) m = std::max(m, std::abs(x));
    return m;
}

// Nearest entry of a sorted level set; ties go to the larger magnitude.
double nearest_level(double x, std::span<const double> levels) {
    auto it = std::lower_bound(levels.begin(), levels.end(), x);
    if (it == levels.begin()) return *it;
    if (it == levels.end()) return levels.back();
    const double hi = *it;
    const double lo = *(it - 1);
    const double dhi = hi - x;
    const double dlo = x - lo;
    if (dlo < dhi) return lo;
    if (dhi < dlo) return hi;
    return std::abs(lo) > std::abs(hi) ? lo : hi;
}

double interval_or_one(double spacing) { return spacing > 0.0 ? spacing : 1.0; }

}  // namespace

std::vector<double> integer_levels(int bits) {
    check_bits(bits);
    const long long half = 1LL << (bits - 1);
    std::vector<double> levels;
    levels.reserve(static_cast<std::size_t>(2 * half));
    for (long long v = -half; v <= half - 1; ++v) levels.push_back(static_cast<double>(v));
    return levels;
}

BaselineResult iterative_l2(std::span<const double> w_f, int bits, const IterativeOptions& options) {
    if (w_f.empty()) fail(ErrorCode::EmptyInput, "empty input");
    if (options.max_iters < 1) fail(ErrorCode::InvalidArgument, "max_iters must be >= 1");

    std::vector<double> levels = options.levels.empty() ? integer_levels(bits) : options.levels;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const int code_bits = options.levels.empty()
                              ? bits
                              : static_cast<int>(std::ceil(std::log2(std::max<double>(2.0, static_cast<double>(levels.size())))));

    const double w_max = max_abs(w_f);
    BaselineResult out;
    if (w_max == 0.0) {
        CodeVector zero{std::vector<double>(w_f.size(), nearest_level(0.0, levels)), code_bits};
        out.result = assemble_result(w_f, std::move(zero), 1.0, 1.0);
        out.iterations = 1;
        out.l2_history = {out.result.loss_l2};
        return out;
    }

    double alpha;
    if (options.initial_alpha) {
        alpha = *options.initial_alpha;
    } else {
        const double top = levels.back() > 0.0 ? levels.back()
                                               : std::max(std::abs(levels.front()), std::abs(levels.back()));
        if (top == 0.0) fail(ErrorCode::InvalidArgument, "level set only contains zero");
        alpha = w_max / top;
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        fail(ErrorCode::InvalidArgument, "initial alpha must be positive");
    }

    std::vector<double> codes(w_f.size());
    std::vector<double> previous;
    int iterations = 0;
    int reseeds = 0;
    while (iterations < options.max_iters) {
        for (std::size_t i = 0; i < w_f.size(); ++i) codes[i] = nearest_level(w_f[i] / alpha, levels);
        const double cc = dot(codes, codes);
        if (cc == 0.0) {
            // Scale too large for any element to leave the zero level.
            if (++reseeds > 1100) fail(ErrorCode::InvalidArgument, "cannot leave the all-zero assignment");
            alpha *= 0.5;
            continue;
        }
        if (iterations > 0 && codes == previous) break;
        alpha = dot(codes, w_f) / cc;
        ++iterations;
        double l2 = 0.0;
        for (std::size_t i = 0; i < codes.size(); ++i) {
            const double r = w_f[i] - alpha * codes[i];
            l2 += r * r;
        }
        out.l2_history.push_back(l2);
        previous = codes;
    }

    out.iterations = iterations;
    out.result = assemble_result(w_f, CodeVector{previous, code_bits}, interval_or_one(alpha), alpha);
    return out;
}

BaselineResult sign_binary(std::span<const double> w_f) {
    if (w_f.empty()) fail(ErrorCode::EmptyInput, "empty input");
    CodeVector codes;
    codes.bits = 1;
    codes.codes.resize(w_f.size());
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < w_f.size(); ++i) {
        codes.codes[i] = w_f[i] >= 0.0 ? 1.0 : -1.0;
        abs_sum += std::abs(w_f[i]);
    }
    const double alpha = abs_sum / static_cast<double>(w_f.size());
    BaselineResult out;
    out.result = assemble_result(w_f, std::move(codes), interval_or_one(2.0 * alpha), alpha);
    out.l2_history = {out.result.loss_l2};
    return out;
}

BaselineResult linear_round(std::span<const double> w_f, int bits) {
    check_bits(bits);
    if (bits < 2) fail(ErrorCode::InvalidArgument, "linear-round needs k >= 2");
    if (w_f.empty()) fail(ErrorCode::EmptyInput, "empty input");

    const double half = std::ldexp(1.0, bits - 1);
    const double w_max = max_abs(w_f);
    const double alpha = w_max == 0.0 ? 1.0 : w_max / (half - 1.0);
    CodeVector codes;
    codes.bits = bits;
    codes.codes.resize(w_f.size());
    for (std::size_t i = 0; i < w_f.size(); ++i) {
        codes.codes[i] = std::clamp(std::round(w_f[i] / alpha), -half, half - 1.0);
    }
    BaselineResult out;
    out.result = assemble_result(w_f, std::move(codes), alpha, alpha);
    out.l2_history = {out.result.loss_l2};
    return out;
}

}  // namespace vecq
