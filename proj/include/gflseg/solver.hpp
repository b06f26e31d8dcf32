#pragma once

#include <cstddef>
#include <vector>

#include "gflseg/types.hpp"

namespace gflseg {

// Penalty configuration for one solve. All lambdas are per-sequence vectors
// in normalized-signal units.
struct PenaltyConfig {
    std::vector<double> lambda1;
    std::vector<double> lambda2;
    std::vector<double> lambda3;
    double epsilon = 1e-8;
    std::size_t max_iters = 10000;
    double tol_obj = 1e-9;
    double tol_param = 1e-6;
    // Post-convergence cleanup: jumps below snap_factor*sqrt(epsilon) are
    // collapsed and values below the same threshold are zeroed. The smoothed
    // objective never produces exact zeros; segmentation needs them.
    bool snap = true;
    double snap_factor = 10.0;
    // Keep the pre-snap iterate (needed by stationarity checks). Large runs
    // may drop it to save one M x N buffer.
    bool keep_unsnapped = true;

    static PenaltyConfig uniform(std::size_t m, double l1, double l2, double l3) {
        PenaltyConfig cfg;
        cfg.lambda1.assign(m, l1);
        cfg.lambda2.assign(m, l2);
        cfg.lambda3.assign(m, l3);
        return cfg;
    }

    void validate(std::size_t m) const;
};

// Symmetric tridiagonal system A x = rhs (sub == sup by construction).
struct TridiagonalSystem {
    std::vector<double> diag;
    std::vector<double> sub;
    std::vector<double> rhs;
    std::size_t size() const { return diag.size(); }
};

struct GflSolution {
    std::size_t n_seq = 0;
    std::size_t n_loci = 0;
    std::vector<double> beta;            // row-major M x N, snapped when enabled
    std::vector<double> beta_unsnapped;  // raw converged iterate (may be empty)
    std::vector<double> objective_trace; // smoothed objective per iteration
    std::size_t iterations = 0;
    bool converged = false;
    double stationarity_gap = 0.0;  // max-norm of the smoothed gradient

    double value(std::size_t i, std::size_t j) const { return beta[i * n_loci + j]; }
    const double* row(std::size_t i) const { return beta.data() + i * n_loci; }
    const double* raw_row(std::size_t i) const {
        return (beta_unsnapped.empty() ? beta.data() : beta_unsnapped.data()) + i * n_loci;
    }
};

// sqrt(x^2 + eps): the smoothed absolute value.
double smoothed_norm(double x, double epsilon);
// sqrt(sum x_i^2 + eps): the smoothed Euclidean norm.
double smoothed_norm(const std::vector<double>& x, double epsilon);

// Smoothed objective f_eps at beta (row-major M x N). Accumulated in long
// double with compensation so the MM descent check is meaningful.
double objective_smoothed(const std::vector<double>& beta, const SignalMatrix& y,
                          const PenaltyConfig& cfg);

// Quadratic surrogate tangent at beta_current, evaluated row-by-row; the
// minimizer of the surrogate for row i solves this system.
TridiagonalSystem build_surrogate(const std::vector<double>& beta_current,
                                  const SignalMatrix& y, const PenaltyConfig& cfg,
                                  std::size_t row);

// Value of the majorizing surrogate g_eps(beta | anchor), constants
// included: equals objective_smoothed(anchor) when beta == anchor and
// dominates objective_smoothed(beta) everywhere.
double surrogate_value(const std::vector<double>& beta, const std::vector<double>& anchor,
                       const SignalMatrix& y, const PenaltyConfig& cfg);

// Thomas algorithm; O(N). The surrogate systems are positive definite, so no
// pivoting is needed. Throws std::runtime_error on a vanishing pivot.
std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys);

// MM minimization of the smoothed objective. Rows within one iteration are
// solved against an immutable snapshot of the previous iterate, so any
// thread count yields bit-identical results.
GflSolution solve_gfl(const SignalMatrix& y, const PenaltyConfig& cfg, int threads = 1);

struct StationarityReport {
    double max_violation = 0.0;
    // Norm of the group subgradient vector per interior column boundary
    // (size N-1); at active jumps this is 1 by construction.
    std::vector<double> per_column_group_norms;
};

// Verifies that the (pre-snap) solution admits a valid subgradient selection
// for the exact objective: signs at active jumps, free coefficients in
// [-1,1] (unit ball columnwise for the group term) at inactive ones.
// jump_tol/group_tol classify jumps as active; pass 0 to derive them from
// epsilon and the largest lambda.
StationarityReport check_stationarity(const GflSolution& sol, const SignalMatrix& y,
                                      const PenaltyConfig& cfg, double jump_tol = 0.0,
                                      double group_tol = 0.0);

}  // namespace gflseg
