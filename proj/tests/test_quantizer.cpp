#include "test_support.hpp"

#include "vecq/error.hpp"
#include "vecq/lambda_template.hpp"
#include "vecq/quantizer.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

using namespace vecq;

namespace {

const std::vector<double> kTwoWeights{2.5, 1.75};

CodeVector codes_of(std::vector<double> c, int bits = 2) { return CodeVector{std::move(c), bits}; }

// min over lambda in {0.001, ..., 3.000} of J_l2 after steer + drive.
double exhaustive_l2(const std::vector<double>& w, int bits) {
    double best = std::numeric_limits<double>::infinity();
    for (int g = 1; g <= 3000; ++g) {
        const double lambda = g * 0.001;
        CodeVector c;
        c.bits = bits;
        c.codes.resize(w.size());
        double cw = 0.0, cc = 0.0;
        const double half = std::pow(2.0, bits - 1);
        for (std::size_t i = 0; i < w.size(); ++i) {
            double level = std::round(w[i] / lambda - 0.5);
            level = std::min(std::max(level, -half), half - 1.0) + 0.5;
            cw += level * w[i];
            cc += level * level;
        }
        const double alpha = cw / cc;
        double l2 = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double level = std::round(w[i] / lambda - 0.5);
            level = std::min(std::max(level, -half), half - 1.0) + 0.5;
            const double r = w[i] - alpha * level;
            l2 += r * r;
        }
        best = std::min(best, l2);
    }
    return best;
}

}  // namespace

TEST_CASE("orientation loss") {
    const std::vector<double> v{1, 2, 3};
    CHECK(orientation_loss(v, v) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(orientation_loss(kTwoWeights, std::vector<double>{2, 1}) - 0.0108) < 1e-3);
    CHECK(orientation_loss(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0);
    CHECK_THROWS_AS(orientation_loss(std::vector<double>{0, 0}, std::vector<double>{0, 1}), Error);
}

TEST_CASE("modulus loss") {
    CHECK(modulus_loss(kTwoWeights, kTwoWeights) == 0.0);
    CHECK(modulus_loss(kTwoWeights, std::vector<double>{2.7, 1.35}) == doctest::Approx(0.20).epsilon(1e-9));
    CHECK(modulus_loss(kTwoWeights, std::vector<double>{2.125, 2.125}) == 0.28125);
    CHECK_THROWS_AS(modulus_loss(kTwoWeights, std::vector<double>{1}), Error);
}

TEST_CASE("steer") {
    CHECK(steer(std::vector<double>{0.9957 * 0.5}, 0.9957, 2).codes == std::vector<double>{0.5});
    CHECK(steer(std::vector<double>{-100}, 0.37, 2).codes == std::vector<double>{-1.5});
    CHECK(steer(std::vector<double>{100}, 1.0, 2).codes == std::vector<double>{1.5});
    CHECK_THROWS_AS(steer(kTwoWeights, 0.0, 2), Error);
    CHECK_THROWS_AS(steer(kTwoWeights, -1.0, 2), Error);
    CHECK_THROWS_AS(steer(kTwoWeights, 1.0, 0), Error);
}

TEST_CASE("steer breaks rounding ties away from zero") {
    // w / lambda - 0.5 = +0.5 rounds up, -0.5 rounds down.
    CHECK(steer_value(1.0, 1.0, 3) == 1.5);
    CHECK(steer_value(0.0, 1.0, 3) == -0.5);
    CHECK(steer_value(-1.0, 1.0, 3) == -1.5);
}

TEST_CASE("steer codes stay on the half-integer grid with at most 2^k values") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const int bits = 1 + static_cast<int>(rng() % 8);
        const auto w = testing::normal_vector(500, rng(), 2.0);
        const double lambda = 0.01 + (rng() % 1000) * 0.002;
        const auto c = steer(w, lambda, bits);
        std::set<double> distinct(c.codes.begin(), c.codes.end());
        CHECK(distinct.size() <= (std::size_t{1} << bits));
        const double half = std::ldexp(1.0, bits - 1);
        for (double code : c.codes) {
            CHECK(code - std::floor(code) == 0.5);
            CHECK(code >= -half + 0.5);
            CHECK(code <= half - 0.5);
        }
    }
}

TEST_CASE("steer scale covariance") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int bits = 1 + static_cast<int>(rng() % 6);
        const auto w = testing::normal_vector(200, rng());
        const double lambda = 0.05 + (rng() % 100) * 0.02;
        const double c = scale(rng);
        std::vector<double> cw(w);
        for (double& x : cw) x *= c;
        CHECK(steer(cw, c * lambda, bits).codes == steer(w, lambda, bits).codes);
    }
}

TEST_CASE("drive reproduces the two-weight worked example") {
    const auto a = drive(kTwoWeights, codes_of({2, 1}));
    CHECK(a.alpha == doctest::Approx(1.35).epsilon(1e-12));
    CHECK(a.reconstructed[0] == doctest::Approx(2.7));
    CHECK(a.reconstructed[1] == doctest::Approx(1.35));

    CHECK(drive(kTwoWeights, codes_of({2, 2})).alpha == 1.0625);

    const auto self = drive(kTwoWeights, codes_of(kTwoWeights));
    CHECK(self.alpha == doctest::Approx(1.0));
    CHECK(modulus_loss(kTwoWeights, self.reconstructed) == doctest::Approx(0.0));

    CHECK_THROWS_AS(drive(kTwoWeights, codes_of({0, 0})), Error);
}

TEST_CASE("orientation search over explicit levels picks [2, 1]") {
    const std::vector<double> levels{-1, 0, 1, 2};
    const auto r = select_codes_by_orientation(kTwoWeights, levels);
    CHECK(r.codes.codes == std::vector<double>{2, 1});
    CHECK(r.alpha == doctest::Approx(1.35));
    CHECK(r.loss_l2 == doctest::Approx(0.20).epsilon(1e-12));
}

TEST_CASE("projection is stationary in alpha") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto w = testing::normal_vector(64, rng());
        const auto codes = steer(w, 0.3 + (rng() % 100) * 0.01, 3);
        const auto best = drive(w, codes);
        const double j = modulus_loss(w, best.reconstructed);
        for (double eps : {1e-3, 1e-2, 0.1}) {
            for (double sign : {-1.0, 1.0}) {
                std::vector<double> q(codes.codes);
                for (double& x : q) x *= best.alpha + sign * eps;
                CHECK(modulus_loss(w, q) > j);
            }
        }
        // Residual is orthogonal to the code vector.
        std::vector<double> residual(w);
        for (std::size_t i = 0; i < w.size(); ++i) residual[i] -= best.reconstructed[i];
        CHECK(std::abs(dot(residual, codes.codes)) < 1e-10 * norm(w) * norm(codes.codes));
    }
}

TEST_CASE("quantize result invariants") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int bits = 1 + static_cast<int>(rng() % 8);
        const auto w = testing::normal_vector(2 + rng() % 300, rng(), 0.05 + (rng() % 100) * 0.1);
        const auto r = quantize(w, bits);
        CHECK(r.loss_vector == r.loss_orientation + r.loss_modulus);
        CHECK(r.loss_orientation >= 0.0);
        CHECK(r.loss_orientation <= 2.0);
        for (std::size_t i = 0; i < w.size(); ++i) CHECK(r.reconstructed[i] == r.alpha * r.codes.codes[i]);

        // ||w - w_q||^2 = ||w||^2 (1 - cos^2) once alpha is the projection.
        const double c = cosine(w, r.codes.codes);
        const double law = squared_norm(w) * (1.0 - c * c);
        CHECK(r.loss_l2 == doctest::Approx(law).epsilon(1e-9).scale(squared_norm(w)));
    }
}

TEST_CASE("better orientation implies smaller projected L2 loss") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const auto w = testing::normal_vector(128, rng());
        const auto a = quantize_fixed_lambda(w, 2, 0.2 + (rng() % 200) * 0.01);
        const auto b = quantize_fixed_lambda(w, 2, 0.2 + (rng() % 200) * 0.01);
        const double ca = cosine(w, a.codes.codes);
        const double cb = cosine(w, b.codes.codes);
        if (ca >= cb) {
            CHECK(a.loss_l2 <= b.loss_l2 + 1e-12 * squared_norm(w));
        } else {
            CHECK(b.loss_l2 <= a.loss_l2 + 1e-12 * squared_norm(w));
        }
    }
}

TEST_CASE("quantize on normal data is close to the exhaustive-lambda optimum") {
    const auto w = testing::normal_vector(100'000, 42);
    const auto r = quantize(w, 2);
    const double oracle = exhaustive_l2(w, 2);
    CHECK(r.loss_l2 >= oracle * (1.0 - 1e-12));
    CHECK(r.loss_l2 / w.size() <= 1.10 * oracle / w.size());
}

TEST_CASE("exactly representable weights quantize losslessly") {
    const std::vector<double> codes{-1.5, -0.5, 0.5, 1.5, 0.5, -0.5, 1.5};
    for (double c : {0.01, 0.7, 3.0}) {
        std::vector<double> w(codes);
        for (double& x : w) x *= c;
        const auto r = quantize_fixed_lambda(w, 2, c);
        CHECK(r.codes.codes == codes);
        CHECK(r.loss_vector <= 1e-12);
    }
}

TEST_CASE("one-bit quantization is a sign grid with lambda-free orientation loss") {
    const auto w = testing::normal_vector(1000, 13);
    const double reference = quantize_fixed_lambda(w, 1, 1.0).loss_orientation;
    for (double lambda : {0.01, 0.5, 2.0, 50.0}) {
        const auto r = quantize_fixed_lambda(w, 1, lambda);
        CHECK(r.loss_orientation == doctest::Approx(reference).epsilon(1e-12));
        for (std::size_t i = 0; i < w.size(); ++i) CHECK(r.codes.codes[i] == (w[i] > 0 ? 0.5 : -0.5));
    }
    CHECK(quantize(w, 1).loss_orientation == doctest::Approx(reference).epsilon(1e-12));
}

TEST_CASE("fixed lambda equal to template times sigma matches template mode") {
    const auto w = testing::normal_vector(5000, 17, 0.3);
    for (int bits = 1; bits <= 10; ++bits) {
        const auto a = quantize(w, bits);
        const auto b = quantize_fixed_lambda(w, bits, LambdaTemplate::reference().at(bits) * stats(w).stddev());
        CHECK(a.codes.codes == b.codes.codes);
        CHECK(a.alpha == b.alpha);
        CHECK(a.reconstructed == b.reconstructed);
        CHECK(a.loss_l2 == b.loss_l2);
    }
}

TEST_CASE("huge lambda collapses two-bit codes to signs") {
    const auto w = testing::normal_vector(300, 19);
    const auto r = quantize_fixed_lambda(w, 2, 1e12);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(r.codes.codes[i] == (w[i] > 0 ? 0.5 : -0.5));
}

TEST_CASE("min orientation over a lambda sweep equals empirical_lambda") {
    const auto w = testing::normal_vector(20'000, 23, 0.4);
    const double sigma = stats(w).stddev();
    std::vector<double> phi(w);
    for (double& x : phi) x /= sigma;
    for (int bits : {2, 3, 5}) {
        double best_lambda = 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (int g = 1; g <= 3000; ++g) {
            const double lambda = g * 0.001;
            const double jo = quantize_fixed_lambda(phi, bits, lambda).loss_orientation;
            if (jo < best) {
                best = jo;
                best_lambda = lambda;
            }
        }
        const double emp = empirical_lambda(w, bits);
        const double at_emp = quantize_fixed_lambda(phi, bits, emp).loss_orientation;
        CHECK(at_emp == doctest::Approx(best).epsilon(1e-12).scale(1.0));
        CHECK(std::abs(emp - best_lambda) < 0.01);
    }
}

TEST_CASE("zero-variance input reconstructs the constant exactly") {
    for (double c : {0.0, 0.37, -2.5}) {
        const std::vector<double> w(9, c);
        const auto r = quantize(w, 2);
        CHECK(r.reconstructed == w);
        CHECK(r.loss_vector <= 1e-15);
        CHECK(r.lambda > 0.0);
    }
    const auto single = quantize(std::vector<double>{4.0}, 3);
    CHECK(single.reconstructed == std::vector<double>{4.0});
}

TEST_CASE("quantize rejects bad bitwidths") {
    CHECK_THROWS_AS(quantize(kTwoWeights, 0), Error);
    CHECK_THROWS_AS(quantize(kTwoWeights, 31), Error);
    CHECK_NOTHROW(quantize(kTwoWeights, 30));
    CHECK_THROWS_AS(quantize(std::vector<double>{}, 2), Error);
}
