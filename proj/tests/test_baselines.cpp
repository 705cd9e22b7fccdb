#include "test_support.hpp"

#include "vecq/baselines.hpp"
#include "vecq/error.hpp"
#include "vecq/quantizer.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace vecq;

namespace {

// Global minimum of ||w - alpha v||^2 over v in levels^d, by scanning alpha
// on a fine grid, assigning each element to its nearest level, and
// re-projecting alpha for the resulting assignment.
double brute_force_l2(const std::vector<double>& w, const std::vector<double>& levels, double alpha_max,
                      double step) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> v(w.size());
    for (double alpha = step; alpha <= alpha_max; alpha += step) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            double pick = levels[0];
            for (double l : levels)
                if (std::abs(w[i] - alpha * l) < std::abs(w[i] - alpha * pick)) pick = l;
            v[i] = pick;
        }
        double vw = 0.0, vv = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            vw += v[i] * w[i];
            vv += v[i] * v[i];
        }
        if (vv == 0.0) continue;
        const double a = vw / vv;
        double l2 = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) l2 += (w[i] - a * v[i]) * (w[i] - a * v[i]);
        best = std::min(best, l2);
    }
    return best;
}

}  // namespace

TEST_CASE("integer level grid") {
    CHECK(integer_levels(2) == std::vector<double>{-2, -1, 0, 1});
    CHECK(integer_levels(1) == std::vector<double>{-1, 0});
    CHECK(integer_levels(3).size() == 8);
}

TEST_CASE("iterative L2 falls into the [2, 2] basin of the worked example") {
    IterativeOptions opt;
    opt.initial_alpha = 1.1;  // first assignment rounds both weights to 2
    const auto r = iterative_l2(std::vector<double>{2.5, 1.75}, 3, opt);
    CHECK(r.result.codes.codes == std::vector<double>{2, 2});
    CHECK(r.result.alpha == 1.0625);
    CHECK(r.result.loss_l2 == doctest::Approx(0.28125).epsilon(1e-12));
    CHECK(r.iterations == 1);

    IterativeOptions levels;
    levels.levels = {-1, 0, 1, 2};
    levels.initial_alpha = 1.1;
    CHECK(iterative_l2(std::vector<double>{2.5, 1.75}, 2, levels).result.loss_l2 ==
          doctest::Approx(0.28125));
}

TEST_CASE("iterative L2 stops immediately on representable input") {
    const std::vector<double> w{0.5, -1.0, 1.5};
    const auto r = iterative_l2(w, 3);
    CHECK(r.iterations == 1);
    CHECK(r.result.loss_l2 == doctest::Approx(0.0).scale(1.0));
    CHECK(r.result.codes.codes == std::vector<double>{1, -2, 3});
}

TEST_CASE("iterative L2 never beats the brute-force global minimum") {
    const auto w = testing::normal_vector(1000, 77);
    const auto r = iterative_l2(w, 2);
    const double oracle = brute_force_l2(w, integer_levels(2), 4.0, 0.001);
    CHECK(r.result.loss_l2 >= oracle - 1e-9);
}

TEST_CASE("iterative L2 loss history is non-increasing") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const int bits = 1 + static_cast<int>(rng() % 5);
        const auto w = testing::normal_vector(16 + rng() % 500, rng(), 0.5);
        const auto r = iterative_l2(w, bits);
        REQUIRE(r.iterations >= 1);
        CHECK(r.l2_history.size() == static_cast<std::size_t>(r.iterations));
        for (std::size_t i = 1; i < r.l2_history.size(); ++i) {
            CHECK(r.l2_history[i] <= r.l2_history[i - 1] * (1.0 + 1e-12));
        }
        CHECK(r.result.loss_l2 == doctest::Approx(r.l2_history.back()).epsilon(1e-12));
    }
}

TEST_CASE("iterative L2 re-seeds when the initial scale zeroes every code") {
    IterativeOptions opt;
    opt.initial_alpha = 1e6;
    const auto w = testing::normal_vector(100, 5);
    const auto r = iterative_l2(w, 2, opt);
    CHECK(r.iterations >= 1);
    CHECK(squared_norm(r.result.codes.codes) > 0.0);
    CHECK(r.result.loss_l2 < squared_norm(w));
}

TEST_CASE("iterative L2 input validation") {
    IterativeOptions bad;
    bad.max_iters = 0;
    CHECK_THROWS_AS(iterative_l2(std::vector<double>{1.0}, 2, bad), Error);
    CHECK_THROWS_AS(iterative_l2(std::vector<double>{}, 2), Error);
    const auto zero = iterative_l2(std::vector<double>(4, 0.0), 2);
    CHECK(zero.result.loss_l2 == 0.0);
}

TEST_CASE("sign binary") {
    const auto a = sign_binary(std::vector<double>{1, -1, 1});
    CHECK(a.result.alpha == 1.0);
    CHECK(a.result.reconstructed == std::vector<double>{1, -1, 1});

    const auto b = sign_binary(std::vector<double>{3, -1});
    CHECK(b.result.alpha == 2.0);
    CHECK(b.result.reconstructed == std::vector<double>{2, -2});
    CHECK(b.result.loss_l2 == 2.0);

    CHECK(sign_binary(std::vector<double>{0.0}).result.codes.codes == std::vector<double>{1.0});

    const auto w = testing::normal_vector(333, 8);
    const auto c = sign_binary(w);
    CHECK(c.result.alpha == doctest::Approx(drive(w, c.result.codes).alpha).epsilon(1e-12));
}

TEST_CASE("linear rounding") {
    const auto a = linear_round(std::vector<double>{-1, 1}, 2);
    CHECK(a.result.alpha == 1.0);
    CHECK(a.result.codes.codes == std::vector<double>{-1, 1});
    CHECK(a.result.loss_l2 == 0.0);

    const auto b = linear_round(std::vector<double>{0.4, 0.6}, 2);
    CHECK(b.result.alpha == 0.6);
    CHECK(b.result.codes.codes == std::vector<double>{1, 1});
    CHECK(b.result.reconstructed == std::vector<double>{0.6, 0.6});

    const auto z = linear_round(std::vector<double>{0, 0, 0}, 4);
    CHECK(z.result.alpha == 1.0);
    CHECK(z.result.reconstructed == std::vector<double>{0, 0, 0});

    CHECK_THROWS_AS(linear_round(std::vector<double>{1.0}, 1), Error);
}

TEST_CASE("linear rounding loses to vecq on normal data") {
    for (int bits : {2, 3, 4}) {
        int vecq_wins = 0;
        const int trials = 100;
        for (int t = 0; t < trials; ++t) {
            const auto w = testing::normal_vector(1024, 1000 + t);
            if (linear_round(w, bits).result.loss_l2 >= quantize(w, bits).loss_l2) ++vecq_wins;
        }
        CHECK(vecq_wins >= 90);
    }
}

TEST_CASE("re-driving baseline codes never increases L2 loss") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int bits = 2 + static_cast<int>(rng() % 4);
        const auto w = testing::normal_vector(64 + rng() % 256, rng());
        for (const auto& b : {iterative_l2(w, bits), sign_binary(w), linear_round(w, bits)}) {
            const auto redriven = drive(w, b.result.codes);
            CHECK(modulus_loss(w, redriven.reconstructed) <= b.result.loss_l2 * (1.0 + 1e-12));
        }
    }
}
