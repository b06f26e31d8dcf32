#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gflseg/rng.hpp"
#include "gflseg/tuning.hpp"
#include "testutil.hpp"

using namespace gflseg;

namespace {

std::vector<std::uint8_t> ones(std::size_t n) { return std::vector<std::uint8_t>(n, 1); }

}  // namespace

TEST_CASE("sigma estimate on alternating row") {
    const std::vector<double> y{0, 2, 0, 2, 0};
    const auto est = estimate_sigma(y, ones(y.size()), SigmaEstimator::kSd);
    // diffs (2,-2,2,-2): sample SD sqrt(16/3), sigma = that / sqrt(2)
    CHECK(est.sigma == doctest::Approx(std::sqrt(16.0 / 3.0) / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(est.sigma == doctest::Approx(1.6330).epsilon(1e-4));
    CHECK_FALSE(est.degenerate);
}

TEST_CASE("constant row hits the floor and is flagged") {
    const std::vector<double> y(50, 3.25);
    for (auto mode : {SigmaEstimator::kSd, SigmaEstimator::kMad}) {
        const auto est = estimate_sigma(y, ones(y.size()), mode);
        CHECK(est.sigma == kSigmaFloor);
        CHECK(est.degenerate);
    }
}

TEST_CASE("too few observations") {
    const std::vector<double> y{1.0, 2.0};
    CHECK_THROWS_AS(estimate_sigma(y, ones(2), SigmaEstimator::kSd), std::invalid_argument);
    std::vector<double> y3{1.0, 2.0, 3.0};
    std::vector<std::uint8_t> m3{1, 0, 1};
    CHECK_THROWS_AS(estimate_sigma(y3, m3, SigmaEstimator::kSd), std::invalid_argument);
}

TEST_CASE("gaussian noise recovers sigma within 3% in both modes") {
    Rng rng(20260810);
    const std::size_t n = 10000;
    for (auto mode : {SigmaEstimator::kSd, SigmaEstimator::kMad}) {
        double mean = 0.0;
        int inside = 0;
        const int reps = 100;
        for (int rep = 0; rep < reps; ++rep) {
            std::vector<double> y(n);
            for (auto& v : y) v = rng.normal();
            const double s = estimate_sigma(y, ones(n), mode).sigma;
            mean += s;
            if (s > 0.97 && s < 1.03) ++inside;
        }
        mean /= reps;
        CHECK(mean > 0.97);
        CHECK(mean < 1.03);
        CHECK(inside >= 95);  // MAD has ~1% sampling sd at this n
    }
}

TEST_CASE("shift invariance and scaling") {
    Rng rng(7);
    std::vector<double> y(500);
    for (auto& v : y) v = rng.normal(0.0, 0.7);
    for (auto mode : {SigmaEstimator::kSd, SigmaEstimator::kMad}) {
        const double base = estimate_sigma(y, ones(y.size()), mode).sigma;
        std::vector<double> shifted(y), scaled(y);
        for (auto& v : shifted) v += 17.5;
        for (auto& v : scaled) v *= 3.0;
        CHECK(estimate_sigma(shifted, ones(y.size()), mode).sigma ==
              doctest::Approx(base).epsilon(1e-12));
        CHECK(estimate_sigma(scaled, ones(y.size()), mode).sigma ==
              doctest::Approx(3.0 * base).epsilon(1e-12));
    }
}

TEST_CASE("MAD mode shrugs off 1% gross outliers") {
    Rng rng(99);
    std::vector<double> y(10000);
    for (auto& v : y) v = rng.normal();
    const double clean = estimate_sigma(y, ones(y.size()), SigmaEstimator::kMad).sigma;
    std::vector<double> dirty = y;
    for (std::size_t k = 0; k < dirty.size(); k += 100)
        dirty[k] = (k % 200 == 0 ? 100.0 : -100.0);
    const double contaminated =
        estimate_sigma(dirty, ones(y.size()), SigmaEstimator::kMad).sigma;
    CHECK(std::fabs(contaminated - clean) / clean < 0.05);
}

TEST_CASE("differences skip masked cells") {
    // A masked spike must not contribute to any difference.
    std::vector<double> y{0.0, 1000.0, 0.1, -0.1, 0.05, -0.02, 0.08};
    std::vector<std::uint8_t> m{1, 0, 1, 1, 1, 1, 1};
    std::vector<double> y2{0.0, 0.1, -0.1, 0.05, -0.02, 0.08};
    const double with_gap = estimate_sigma(y, m, SigmaEstimator::kSd).sigma;
    const double compact = estimate_sigma(y2, ones(y2.size()), SigmaEstimator::kSd).sigma;
    CHECK(with_gap == doctest::Approx(compact).epsilon(1e-12));
}

TEST_CASE("lambda rules") {
    TuningInputs in;
    in.c1 = 0.1;
    in.c2 = 2.0;
    in.c3 = 2.0;
    in.n_loci = 1000;
    in.n_seq = 4;

    NoiseScale scales;
    scales.sigmas = {1.0, 2.0, 0.5, 1.5};
    scales.degenerate.assign(4, 0);

    SUBCASE("rho = 1 (p = 0): pure fused lasso") {
        in.p = 0.0;
        const auto cfg = compute_lambdas(in, scales);
        const double root_log_n = std::sqrt(std::log(1000.0));
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(cfg.lambda1[i] == doctest::Approx(0.1 * scales.sigmas[i]));
            CHECK(cfg.lambda2[i] ==
                  doctest::Approx(2.0 * scales.sigmas[i] * root_log_n).epsilon(1e-12));
            CHECK(cfg.lambda3[i] == 0.0);
        }
    }
    SUBCASE("rho = 0 (p = 1): pure group penalty") {
        in.p = 1.0;
        const auto cfg = compute_lambdas(in, scales);
        const double root_log_n = std::sqrt(std::log(1000.0));
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(cfg.lambda2[i] == 0.0);
            CHECK(cfg.lambda3[i] ==
                  doctest::Approx(2.0 * scales.sigmas[i] * 2.0 * root_log_n).epsilon(1e-12));
        }
    }
    SUBCASE("p = 0 kills the group penalty regardless of c3") {
        in.p = 0.0;
        in.rho = 0.3;  // even with mixed weights
        const auto cfg = compute_lambdas(in, scales);
        for (std::size_t i = 0; i < 4; ++i) CHECK(cfg.lambda3[i] == 0.0);
    }
    SUBCASE("homogeneous of degree 1 in sigma") {
        in.p = 0.4;
        const auto base = compute_lambdas(in, scales);
        NoiseScale doubled = scales;
        for (auto& s : doubled.sigmas) s *= 2.0;
        const auto twice = compute_lambdas(in, doubled);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(twice.lambda1[i] == doctest::Approx(2.0 * base.lambda1[i]));
            CHECK(twice.lambda2[i] == doctest::Approx(2.0 * base.lambda2[i]));
            CHECK(twice.lambda3[i] == doctest::Approx(2.0 * base.lambda3[i]));
        }
    }
}

TEST_CASE("bias predictions") {
    const auto b = predict_bias(0.1, 4.0, 8.0, 10, 4);
    CHECK(b.bias1 == doctest::Approx(0.1));
    CHECK(b.bias2 == doctest::Approx(0.4));
    CHECK(b.bias3 == doctest::Approx(0.4));
    CHECK(predict_bias(0, 4.0, 0, 10, 1).bias2 * 10 == doctest::Approx(4.0));
    CHECK_THROWS_AS(predict_bias(0, 1, 0, 0, 1), std::invalid_argument);
}

TEST_CASE("predicted lambda2 bias matches the measured edge-segment shift") {
    // Noiseless two-level signal: the first (edge) segment is pulled up by
    // exactly lambda2/L, which is what predict_bias reports.
    std::vector<double> row(20, 0.0);
    for (std::size_t j = 10; j < 20; ++j) row[j] = 1.0;
    auto y = testutil::matrix_from({row});
    auto cfg = PenaltyConfig::uniform(1, 0.0, 0.6, 0.0);
    testutil::tighten(cfg);
    const auto sol = solve_gfl(y, cfg);
    const double measured = sol.value(0, 0) - 0.0;
    const double predicted = predict_bias(0.0, 0.6, 0.0, 10, 1).bias2;
    CHECK(std::fabs(measured - predicted) <= 0.2 * predicted);
}
