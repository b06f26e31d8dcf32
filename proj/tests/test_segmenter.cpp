#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gflseg/rng.hpp"
#include "gflseg/segmenter.hpp"
#include "gflseg/signal_model.hpp"
#include "gflseg/sim.hpp"
#include "gflseg/tuning.hpp"
#include "testutil.hpp"

using namespace gflseg;

TEST_CASE("jump extraction") {
    const std::vector<double> beta{1.0, 1.0, 3.0, 3.0};
    const auto d = extract_jumps(beta.data(), beta.size());
    CHECK(d == std::vector<double>({0.0, 2.0, 0.0}));
    const std::vector<double> flat{2.0, 2.0, 2.0};
    for (double v : extract_jumps(flat.data(), 3)) CHECK(v == 0.0);
}

TEST_CASE("ruler threshold") {
    ThresholdRule rule;  // a=1, b=5, c=0.2
    SUBCASE("large jump caps gamma at b*sigma") {
        // D=10, sigma=1 -> gamma=5, cutoff=1
        std::vector<double> d{0.0, 10.0, 0.5, -1.2};
        const auto cps = threshold_ruler(d, 1.0, rule);
        CHECK(cps == std::vector<std::size_t>({2, 4}));
    }
    SUBCASE("small max jump floors gamma at a*sigma") {
        // D=0.5 -> gamma=max(1, min(0.5,5))=1, cutoff=0.2
        std::vector<double> d{0.1, 0.5, -0.15};
        const auto cps = threshold_ruler(d, 1.0, rule);
        CHECK(cps == std::vector<std::size_t>({2}));
    }
    SUBCASE("single clear jump") {
        std::vector<double> d{0.0, 2.0, 0.0};
        const auto cps = threshold_ruler(d, 1.0, rule);
        CHECK(cps == std::vector<std::size_t>({2}));
    }
    SUBCASE("scale invariance") {
        Rng rng(3);
        std::vector<double> d(30);
        for (auto& v : d) v = rng.normal(0.0, 0.4);
        d[12] = 3.0;
        const auto base = threshold_ruler(d, 0.7, rule);
        std::vector<double> scaled = d;
        for (auto& v : scaled) v *= 41.0;
        CHECK(threshold_ruler(scaled, 0.7 * 41.0, rule) == base);
    }
    SUBCASE("gamma stays within [a*sigma, b*sigma]") {
        Rng rng(4);
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<double> d(20);
            for (auto& v : d) v = rng.normal(0.0, rng.uniform(0.01, 10.0));
            double dmax = 0.0;
            for (double v : d) dmax = std::max(dmax, std::fabs(v));
            const double sigma = rng.uniform(0.1, 2.0);
            const double gamma = std::max(rule.a * sigma, std::min(dmax, rule.b * sigma));
            CHECK(gamma >= rule.a * sigma);
            CHECK(gamma <= rule.b * sigma);
        }
    }
    SUBCASE("exact ties at the cutoff are excluded") {
        // gamma = max(1, min(2,5)) = 2, cutoff = 0.4; |d|=0.4 must not pass
        std::vector<double> d{0.4, 2.0, -0.4};
        const auto cps = threshold_ruler(d, 1.0, rule);
        CHECK(cps == std::vector<std::size_t>({2}));
    }
    SUBCASE("parameter validation") {
        ThresholdRule bad;
        bad.a = 5.0;
        bad.b = 1.0;
        std::vector<double> d{0.1};
        CHECK_THROWS_AS(static_cast<void>(threshold_ruler(d, 1.0, bad)),
                        std::invalid_argument);
    }
}

TEST_CASE("mBIC selection") {
    Rng rng(606);
    SUBCASE("pure noise keeps zero change points in most replicates") {
        int zero = 0;
        const std::size_t n = 500;
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> y(n);
            for (auto& v : y) v = rng.normal();
            std::vector<double> jumps(n - 1);
            for (std::size_t b = 0; b + 1 < n; ++b) jumps[b] = y[b + 1] - y[b];
            const auto cps = threshold_mbic(y, std::vector<std::uint8_t>(n, 1), jumps, 1.0);
            if (cps.empty()) ++zero;
        }
        CHECK(zero >= 90);
    }
    SUBCASE("single 6-sigma jump is found at the right place") {
        // Candidates come from a fitted profile, as in the pipeline.
        int hit = 0;
        const std::size_t n = 1000;
        auto pen = PenaltyConfig::uniform(1, 0.0, 2.0 * std::sqrt(std::log(1000.0)), 0.0);
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<std::vector<double>> rows(1, std::vector<double>(n));
            for (std::size_t j = 0; j < n; ++j)
                rows[0][j] = (j >= 400 ? 6.0 : 0.0) + rng.normal();
            auto y = testutil::matrix_from(rows);
            const auto sol = solve_gfl(y, pen);
            const auto jumps = extract_jumps(sol, 0);
            const auto cps =
                threshold_mbic(rows[0], std::vector<std::uint8_t>(n, 1), jumps, 1.0);
            if (cps.size() == 1 && cps[0] == 400) ++hit;
        }
        CHECK(hit >= 95);
    }
    SUBCASE("all-zero jumps give the empty model") {
        std::vector<double> y(50, 1.0);
        std::vector<double> jumps(49, 0.0);
        CHECK(threshold_mbic(y, std::vector<std::uint8_t>(50, 1), jumps, 1.0).empty());
    }
}

TEST_CASE("segment construction") {
    SUBCASE("two segments") {
        const std::vector<double> beta{1.0, 1.0, 3.0, 3.0};
        const auto row = build_segmentation(beta.data(), 4, {2});
        REQUIRE(row.segments.size() == 2);
        CHECK(row.segments[0].start == 0);
        CHECK(row.segments[0].end == 1);
        CHECK(row.segments[0].mean_beta == doctest::Approx(1.0));
        CHECK(row.segments[1].start == 2);
        CHECK(row.segments[1].end == 3);
        CHECK(row.segments[1].mean_beta == doctest::Approx(3.0));
    }
    SUBCASE("no change points") {
        const std::vector<double> beta{1.0, 2.0, 3.0};
        const auto row = build_segmentation(beta.data(), 3, {});
        REQUIRE(row.segments.size() == 1);
        CHECK(row.segments[0].mean_beta == doctest::Approx(2.0));
        CHECK(row.segments[0].length() == 3);
    }
    SUBCASE("segments partition the grid") {
        Rng rng(9);
        std::vector<double> beta(40);
        for (auto& v : beta) v = rng.normal();
        const std::vector<std::size_t> cps{5, 11, 30};
        const auto row = build_segmentation(beta.data(), 40, cps);
        std::size_t total = 0;
        for (std::size_t k = 0; k < row.segments.size(); ++k) {
            total += row.segments[k].length();
            if (k > 0) CHECK(row.segments[k].start == row.segments[k - 1].end + 1);
        }
        CHECK(total == 40);
    }
    SUBCASE("full jump set reproduces beta exactly") {
        Rng rng(10);
        std::vector<double> beta(25);
        for (auto& v : beta) v = rng.normal();
        std::vector<std::size_t> cps;
        for (std::size_t b = 1; b < 25; ++b) cps.push_back(b);
        const auto row = build_segmentation(beta.data(), 25, cps);
        REQUIRE(row.segments.size() == 25);
        for (std::size_t j = 0; j < 25; ++j)
            CHECK(row.segments[j].mean_beta == beta[j]);
    }
    SUBCASE("bad change points rejected") {
        const std::vector<double> beta{1.0, 2.0};
        CHECK_THROWS_AS(static_cast<void>(build_segmentation(beta.data(), 2, {0})),
                        std::invalid_argument);
        CHECK_THROWS_AS(static_cast<void>(build_segmentation(beta.data(), 2, {2})),
                        std::invalid_argument);
    }
}

TEST_CASE("raw means are recomputed from observed data") {
    auto y = testutil::matrix_from({{10.0, 12.0, 99.0, 20.0}}, {{1, 1, 0, 1}});
    const std::vector<double> beta{11.0, 11.0, 18.0, 18.0};
    auto row = build_segmentation(beta.data(), 4, {2});
    attach_raw_means(row, y, 0);
    CHECK(row.segments[0].mean_raw == doctest::Approx(11.0));
    CHECK(row.segments[0].has_raw);
    // masked 99 is skipped: only the 20 counts
    CHECK(row.segments[1].mean_raw == doctest::Approx(20.0));
}

TEST_CASE("merge change points") {
    using V = std::vector<std::size_t>;
    CHECK(merge_changepoints(V{100}, V{200}) == V{100, 200});
    CHECK(merge_changepoints(V{100, 200}, V{100, 200}) == V{100, 200});
    CHECK(merge_changepoints(V{50}, V{50, 80}) == V{50, 80});
    // commutative, associative, idempotent
    Rng rng(12);
    V a, b, c;
    for (int k = 0; k < 10; ++k) {
        a.push_back(rng.below(100) + 1);
        b.push_back(rng.below(100) + 1);
        c.push_back(rng.below(100) + 1);
    }
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    CHECK(merge_changepoints(a, b) == merge_changepoints(b, a));
    CHECK(merge_changepoints(merge_changepoints(a, b), c) ==
          merge_changepoints(a, merge_changepoints(b, c)));
    CHECK(merge_changepoints(a, a) == a);
}

TEST_CASE("13000-locus round trip recovers a 10-SNP deletion segment") {
    SimConfig cfg;
    cfg.n_loci = 13000;
    CnvSpec cnv;
    cnv.type = CnvType::kLoss1;
    cnv.length = 10;
    cnv.start = (cfg.n_loci - 10) / 2;
    const auto sample = simulate_normal(cfg, {cnv}, 271828);

    SignalMatrix input = sample.signals;
    mbaf_transform_row(input, 1, kDefaultHetBand);
    const auto scales = estimate_sigma(input, SigmaEstimator::kSd);
    const auto normed = normalize(input, scales);
    TuningInputs tune;
    tune.p = 1.0;
    tune.n_loci = cfg.n_loci;
    tune.n_seq = 2;
    NoiseScale unit;
    unit.sigmas.assign(2, 1.0);
    unit.degenerate.assign(2, 0);
    const auto pen = compute_lambdas(tune, unit);
    const auto sol = solve_gfl(normed, pen);

    const auto cps = threshold_ruler(extract_jumps(sol, 0), 1.0, ThresholdRule{});
    const auto row = build_segmentation(sol.row(0), cfg.n_loci, cps);
    bool found = false;
    for (const auto& seg : row.segments)
        if (seg.start == cnv.start && seg.length() == 10) found = true;
    CHECK(found);
}

TEST_CASE("solution-to-segments pipeline on a clean jump") {
    auto y = testutil::matrix_from({{0.0, 0.05, -0.1, 3.0, 2.95, 3.1}});
    auto cfg = PenaltyConfig::uniform(1, 0.0, 0.4, 0.0);
    const auto sol = solve_gfl(y, cfg);
    NoiseScale scales;
    scales.sigmas = {0.1};
    scales.degenerate = {0};
    const auto rows = segment_solution(sol, y, scales, ThresholdRule{});
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].segments.size() == 2);
    CHECK(rows[0].change_points == std::vector<std::size_t>{3});
    CHECK(rows[0].segments[0].mean_raw == doctest::Approx(-0.05 / 3.0).epsilon(1e-9));
    CHECK(rows[0].segments[1].mean_raw == doctest::Approx(3.05 / 3.0 + 2.0).epsilon(1e-9));
}
