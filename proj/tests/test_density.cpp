#include "test_support.hpp"

#include "vecq/density.hpp"
#include "vecq/error.hpp"
#include "vecq/normal.hpp"
#include "vecq/quantizer.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vecq;

TEST_CASE("fit_normal") {
    CHECK(fit_normal(std::vector<double>{-1, 1}).sigma == 1.0);
    CHECK(fit_normal(std::vector<double>(7, 0.3)).sigma == 0.0);
    const double s = fit_normal(testing::normal_vector(100'000, 12, 2.0)).sigma;
    CHECK(s >= 1.97);
    CHECK(s <= 2.03);
    CHECK_THROWS_AS(fit_normal(std::vector<double>{1.0}), Error);
}

TEST_CASE("moment accumulator merges like a single pass") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto v = testing::normal_vector(2 + rng() % 500, rng(), 3.0);
        const std::size_t cut = rng() % v.size();
        MomentAccumulator all, left, right;
        for (std::size_t i = 0; i < v.size(); ++i) {
            all.add(v[i]);
            (i < cut ? left : right).add(v[i]);
        }
        left.merge(right);
        CHECK(left.count() == all.count());
        CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
        CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-10));
    }
}

TEST_CASE("kde peak for a single sample") {
    const KdeModel m({0.0}, 1.0);
    CHECK(kde_pdf(m, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
    CHECK(kde_pdf(m, 0.0) == doctest::Approx(0.3989).epsilon(1e-4));
    CHECK_THROWS_AS(KdeModel({0.0}, 0.0), Error);
    CHECK_THROWS_AS(KdeModel({}, 1.0), Error);
}

TEST_CASE("kde integrates to one") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto m = KdeModel::with_silverman_bandwidth(testing::normal_vector(500, seed, 1.5));
        double integral = 0.0;
        for (int i = 0; i <= 2000; ++i) integral += kde_pdf(m, -10.0 + i * 0.01) * 0.01;
        CHECK(std::abs(integral - 1.0) <= 0.01);
    }
}

TEST_CASE("kde converges to the normal density") {
    const auto m = KdeModel::with_silverman_bandwidth(testing::normal_vector(20'000, 44));
    double worst = 0.0;
    for (double t = -3.0; t <= 3.0; t += 0.05) {
        worst = std::max(worst, std::abs(kde_pdf(m, t) - normal::pdf(t)));
    }
    CHECK(worst <= 0.05);
}

TEST_CASE("standardize") {
    const auto s = standardize(std::vector<double>{2, -2}, NormalModel{2.0});
    CHECK(s == std::vector<double>{1, -1});
    CHECK_THROWS_AS(standardize(std::vector<double>{1, 2}, NormalModel{0.0}), Error);

    const auto w = testing::normal_vector(10'000, 3, 0.07);
    CHECK(stats(standardize(w, fit_normal(w))).variance == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("standardizing leaves orientation loss unchanged") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const auto w = testing::normal_vector(2 + rng() % 400, rng(), 0.01 + (rng() % 100) * 0.05);
        const auto v = testing::normal_vector(w.size(), rng());
        const auto phi = standardize(w, fit_normal(w));
        CHECK(std::abs(orientation_loss(w, v) - orientation_loss(phi, v)) <= 1e-12);
        CHECK(std::abs(cosine(w, v) - cosine(phi, v)) <= 1e-12);
    }
}
