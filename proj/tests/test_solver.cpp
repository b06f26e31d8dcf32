#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gflseg/rng.hpp"
#include "gflseg/solver.hpp"
#include "testutil.hpp"

using namespace gflseg;
using testutil::matrix_from;
using testutil::problem_from;

TEST_CASE("smoothed norm") {
    CHECK(smoothed_norm(0.0, 1e-8) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(smoothed_norm(3.0, 1e-16) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(smoothed_norm(std::vector<double>{3.0, 4.0}, 1e-8) ==
          doctest::Approx(5.0).epsilon(1e-8));
    CHECK(smoothed_norm(-2.0, 1e-8) == smoothed_norm(2.0, 1e-8));
}

TEST_CASE("surrogate entries on a two-point fused instance") {
    auto y = matrix_from({{0.5, 2.5}});
    auto cfg = PenaltyConfig::uniform(1, 0.0, 1.0, 0.0);
    cfg.epsilon = 1e-12;
    std::vector<double> beta{0.0, 1.0};
    const auto sys = build_surrogate(beta, y, cfg, 0);
    REQUIRE(sys.size() == 2);
    CHECK(sys.diag[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(sys.diag[1] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(sys.sub[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(sys.rhs[0] == 0.5);
    CHECK(sys.rhs[1] == 2.5);
}

TEST_CASE("surrogate with all penalties off reduces to the identity fit") {
    auto y = matrix_from({{1.0, -2.0, 3.0}}, {{1, 0, 1}});
    auto cfg = PenaltyConfig::uniform(1, 0.0, 0.0, 0.0);
    std::vector<double> beta{1.0, 0.0, 3.0};
    const auto sys = build_surrogate(beta, y, cfg, 0);
    CHECK(sys.diag[0] == 1.0);
    CHECK(sys.diag[1] == 0.0);  // masked cell: leading 1 replaced by delta
    CHECK(sys.diag[2] == 1.0);
    CHECK(sys.sub[0] == 0.0);
    CHECK(sys.rhs[1] == 0.0);
}

TEST_CASE("masked cell drops from diagonal and rhs but keeps penalties") {
    auto y = matrix_from({{1.0, 5.0, 1.0}}, {{1, 0, 1}});
    auto cfg = PenaltyConfig::uniform(1, 0.0, 0.5, 0.0);
    cfg.epsilon = 1e-12;
    std::vector<double> beta{1.0, 1.0, 1.0};
    const auto sys = build_surrogate(beta, y, cfg, 0);
    CHECK(sys.rhs[1] == 0.0);
    CHECK(sys.diag[1] > 0.0);  // lambda2 terms keep the row coupled
    const double off = sys.sub[0];
    CHECK(sys.diag[1] == doctest::Approx(-2.0 * off).epsilon(1e-9));
}

TEST_CASE("thomas solve matches the dense oracle") {
    SUBCASE("hand instance") {
        TridiagonalSystem sys;
        sys.diag = {2, 2, 2};
        sys.sub = {-1, -1};
        sys.rhs = {1, 0, 1};
        const auto x = solve_tridiagonal(sys);
        CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(x[2] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("identity") {
        TridiagonalSystem sys;
        sys.diag = {1, 1, 1, 1};
        sys.sub = {0, 0, 0};
        sys.rhs = {4, -3, 2, 0.5};
        CHECK(solve_tridiagonal(sys) == sys.rhs);
    }
    SUBCASE("random diagonally dominant, n = 50") {
        Rng rng(11);
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t n = 50;
            TridiagonalSystem sys;
            sys.diag.resize(n);
            sys.sub.resize(n - 1);
            sys.rhs.resize(n);
            for (std::size_t j = 0; j + 1 < n; ++j) sys.sub[j] = rng.uniform(-1.0, 1.0);
            for (std::size_t j = 0; j < n; ++j) {
                const double row = (j > 0 ? std::fabs(sys.sub[j - 1]) : 0.0) +
                                   (j + 1 < n ? std::fabs(sys.sub[j]) : 0.0);
                sys.diag[j] = row + rng.uniform(0.1, 2.0);
                sys.rhs[j] = rng.uniform(-5.0, 5.0);
            }
            const auto x = solve_tridiagonal(sys);
            const auto ref = oracle::dense_tridiag_solve(sys.diag, sys.sub, sys.rhs);
            double scale = 0.0, err = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                scale = std::max(scale, std::fabs(ref[j]));
                err = std::max(err, std::fabs(x[j] - ref[j]));
            }
            CHECK(err <= 1e-10 * (1.0 + scale));
        }
    }
}

TEST_CASE("two-point fused lasso closed form") {
    auto y = matrix_from({{0.0, 4.0}});
    auto cfg = PenaltyConfig::uniform(1, 0.0, 1.0, 0.0);
    const auto sol = solve_gfl(y, cfg);
    CHECK(sol.converged);
    CHECK(sol.value(0, 0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(sol.value(0, 1) == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("constant row is a fixed point for any jump penalties") {
    auto y = matrix_from({{2.5, 2.5, 2.5, 2.5, 2.5}});
    auto cfg = PenaltyConfig::uniform(1, 0.0, 3.0, 1.0);
    const auto sol = solve_gfl(y, cfg);
    for (std::size_t j = 0; j < 5; ++j)
        CHECK(sol.value(0, j) == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("two identical rows under the group penalty") {
    auto y = matrix_from({{0.0, 4.0}, {0.0, 4.0}});
    auto cfg = PenaltyConfig::uniform(2, 0.0, 0.0, std::sqrt(2.0));
    const auto sol = solve_gfl(y, cfg);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(sol.value(i, 0) == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(sol.value(i, 1) == doctest::Approx(3.0).epsilon(1e-4));
    }
}

TEST_CASE("missing middle value is interpolated") {
    auto y = matrix_from({{1.0, -99.0, 1.0}}, {{1, 0, 1}});
    auto cfg = PenaltyConfig::uniform(1, 0.0, 0.5, 0.0);
    const auto sol = solve_gfl(y, cfg);
    CHECK(sol.value(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.value(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.value(0, 2) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("MM descent and surrogate tangency on random instances") {
    Rng rng(101);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 1 + rng.below(3);
        const std::size_t n = 8 + rng.below(23);
        auto y = testutil::random_instance(rng, m, n, rep % 2 == 0);
        auto cfg = testutil::random_penalties(rng, m);
        const auto sol = solve_gfl(y, cfg);
        for (std::size_t k = 1; k < sol.objective_trace.size(); ++k)
            CHECK(sol.objective_trace[k] <= sol.objective_trace[k - 1] + 1e-12);

        // Tangency: g(z|z) = f(z); majorization: g(x|z) >= f(x).
        const std::vector<double>& z = sol.beta_unsnapped;
        const double fz = objective_smoothed(z, y, cfg);
        const double gz = surrogate_value(z, z, y, cfg);
        CHECK(gz == doctest::Approx(fz).epsilon(1e-9));
        std::vector<double> x = z;
        for (auto& v : x) v += 0.3 * rng.normal();
        const double fx = objective_smoothed(x, y, cfg);
        const double gx = surrogate_value(x, z, y, cfg);
        CHECK(gx >= fx - 1e-9 * (1.0 + std::fabs(fx)));
    }
}

TEST_CASE("masked entries carry no information") {
    Rng rng(55);
    auto y = testutil::random_instance(rng, 2, 15, true);
    auto cfg = testutil::random_penalties(rng, 2);
    const auto base = solve_gfl(y, cfg);
    auto pert = y;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 15; ++j)
            if (!pert.observed(i, j)) pert.value(i, j) = 1e6;  // never read
    const auto again = solve_gfl(pert, cfg);
    CHECK(base.beta == again.beta);
    CHECK(base.objective_trace == again.objective_trace);
}

TEST_CASE("row-parallel schedule is bit-identical") {
    Rng rng(56);
    auto y = testutil::random_instance(rng, 3, 40, true);
    auto cfg = testutil::random_penalties(rng, 3);
    const auto one = solve_gfl(y, cfg, 1);
    const auto many = solve_gfl(y, cfg, 8);
    CHECK(one.beta == many.beta);
    CHECK(one.objective_trace == many.objective_trace);
}

TEST_CASE("stationarity check") {
    SUBCASE("two-point optimum") {
        auto y = matrix_from({{0.0, 4.0}});
        auto cfg = PenaltyConfig::uniform(1, 0.0, 1.0, 0.0);
        testutil::tighten(cfg);
        const auto sol = solve_gfl(y, cfg);
        const auto rep = check_stationarity(sol, y, cfg);
        CHECK(rep.max_violation <= 1e-6);
    }
    SUBCASE("unpenalized optimum is exactly stationary") {
        auto y = matrix_from({{1.0, -2.0, 0.5}});
        auto cfg = PenaltyConfig::uniform(1, 0.0, 0.0, 0.0);
        const auto sol = solve_gfl(y, cfg);
        const auto rep = check_stationarity(sol, y, cfg);
        CHECK(rep.max_violation == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("perturbation is flagged") {
        auto y = matrix_from({{0.0, 4.0}});
        auto cfg = PenaltyConfig::uniform(1, 0.0, 1.0, 0.0);
        testutil::tighten(cfg);
        auto sol = solve_gfl(y, cfg);
        sol.beta_unsnapped[1] += 0.1;
        const auto rep = check_stationarity(sol, y, cfg);
        CHECK(rep.max_violation >= 0.05);
    }
    SUBCASE("group subgradient at a shared jump") {
        auto y = matrix_from({{0.0, 4.0}, {0.0, 4.0}});
        auto cfg = PenaltyConfig::uniform(2, 0.0, 0.0, std::sqrt(2.0));
        testutil::tighten(cfg);
        const auto sol = solve_gfl(y, cfg);
        const auto rep = check_stationarity(sol, y, cfg);
        CHECK(rep.max_violation <= 1e-6);
        REQUIRE(rep.per_column_group_norms.size() == 1);
        CHECK(rep.per_column_group_norms[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("interior segment shows the 2*lambda2/L fused bias") {
    // Noiseless three-level signal: the middle (local maximum) segment is
    // pulled down by 2*lambda2/L, the edge segments up by lambda2/L.
    std::vector<double> row(30, 0.0);
    for (std::size_t j = 10; j < 20; ++j) row[j] = 1.0;
    auto y = matrix_from({row});
    auto cfg = PenaltyConfig::uniform(1, 0.0, 0.5, 0.0);
    testutil::tighten(cfg);
    const auto sol = solve_gfl(y, cfg);
    CHECK(sol.value(0, 15) == doctest::Approx(1.0 - 2.0 * 0.5 / 10.0).epsilon(1e-3));
    CHECK(sol.value(0, 0) == doctest::Approx(0.0 + 0.5 / 10.0).epsilon(1e-3));
    CHECK(sol.value(0, 29) == doctest::Approx(0.0 + 0.5 / 10.0).epsilon(1e-3));
}

TEST_CASE("group bias follows the subgradient ratio and shrinks as 1/sqrt(m)") {
    const double lambda3 = 0.8;
    const double h = 2.0;
    auto run = [&](std::size_t m) {
        std::vector<std::vector<double>> rows(m, std::vector<double>(20, 0.0));
        for (auto& r : rows)
            for (std::size_t j = 10; j < 20; ++j) r[j] = h;
        auto y = matrix_from(rows);
        auto cfg = PenaltyConfig::uniform(m, 0.0, 0.0, lambda3);
        testutil::tighten(cfg);
        const auto sol = solve_gfl(y, cfg);
        return sol.value(0, 0);  // first-segment offset from 0
    };
    for (std::size_t m : {1u, 2u, 4u}) {
        const double expected = lambda3 / (std::sqrt(static_cast<double>(m)) * 10.0);
        CHECK(run(m) == doctest::Approx(expected).epsilon(1e-3));
    }
}

TEST_CASE("lambda1 acts as soft thresholding of the lambda1=0 solution") {
    Rng rng(77);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 12 + rng.below(10);
        auto y = testutil::random_instance(rng, 1, n);
        // keep levels away from zero so the threshold does not sit on a knife
        // edge
        auto cfg0 = PenaltyConfig::uniform(1, 0.0, rng.uniform(0.2, 0.8), 0.0);
        testutil::tighten(cfg0);
        auto cfg1 = cfg0;
        const double l1 = rng.uniform(0.05, 0.3);
        cfg1.lambda1.assign(1, l1);
        const auto base = solve_gfl(y, cfg0);
        const auto with_l1 = solve_gfl(y, cfg1);
        for (std::size_t j = 0; j < n; ++j) {
            const double b = base.value(0, j);
            const double expected = (std::fabs(b) > l1) ? (b > 0 ? b - l1 : b + l1) : 0.0;
            CHECK(with_l1.value(0, j) == doctest::Approx(expected).epsilon(1e-4));
        }
    }
}

TEST_CASE("solver objective is never beaten by the oracle on small instances") {
    Rng rng(303);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t m = 1 + rng.below(3);
        const std::size_t n = 8 + rng.below(15);
        auto y = testutil::random_instance(rng, m, n, true);
        auto cfg = testutil::random_penalties(rng, m);
        testutil::tighten(cfg);
        const auto sol = solve_gfl(y, cfg);
        const auto p = problem_from(y, cfg);
        const auto ref = oracle::minimize(p, 60000);
        const double f_solver = oracle::objective(p, sol.beta);
        CHECK(f_solver <= ref.objective + 1e-5);
    }
}

TEST_CASE("surrogate systems are strictly diagonally dominant on observed rows") {
    Rng rng(404);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 1 + rng.below(3);
        const std::size_t n = 6 + rng.below(20);
        auto y = testutil::random_instance(rng, m, n);
        auto cfg = testutil::random_penalties(rng, m);
        std::vector<double> beta(m * n);
        for (auto& v : beta) v = rng.normal();
        for (std::size_t i = 0; i < m; ++i) {
            const auto sys = build_surrogate(beta, y, cfg, i);
            for (std::size_t j = 0; j < n; ++j) {
                const double off = (j > 0 ? std::fabs(sys.sub[j - 1]) : 0.0) +
                                   (j + 1 < n ? std::fabs(sys.sub[j]) : 0.0);
                CHECK(sys.diag[j] >= off + 1.0 - 1e-12);  // delta=1 everywhere here
            }
        }
    }
}

TEST_CASE("stationarity gap is tiny at tight convergence") {
    Rng rng(505);
    auto y = testutil::random_instance(rng, 2, 20);
    auto cfg = testutil::random_penalties(rng, 2);
    testutil::tighten(cfg);
    const auto sol = solve_gfl(y, cfg);
    CHECK(sol.converged);
    CHECK(sol.stationarity_gap <= 1e-6);
}

TEST_CASE("invalid configurations are rejected") {
    auto y = matrix_from({{0.0, 1.0}});
    auto cfg = PenaltyConfig::uniform(2, 0, 1, 0);  // wrong M
    CHECK_THROWS_AS(solve_gfl(y, cfg), std::invalid_argument);
    auto cfg2 = PenaltyConfig::uniform(1, 0, -1, 0);
    CHECK_THROWS_AS(solve_gfl(y, cfg2), std::invalid_argument);
    auto cfg3 = PenaltyConfig::uniform(1, 0, 1, 0);
    cfg3.epsilon = 0.0;
    CHECK_THROWS_AS(solve_gfl(y, cfg3), std::invalid_argument);
}
