#pragma once

// Test-only reference implementations. Nothing here shares code with the
// library solver: agreement between the two is evidence, not tautology.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gflseg::oracle {

// A small instance of the exact (non-smoothed) objective.
struct Problem {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<double> y;             // row-major m x n
    std::vector<std::uint8_t> mask;    // row-major m x n
    std::vector<double> lambda1, lambda2, lambda3;  // per sequence
};

// Literal evaluation of the objective, including missing-data masking of the
// fit term.
double objective(const Problem& p, const std::vector<double>& beta);

struct Result {
    std::vector<double> beta;
    double objective = 0.0;
    std::string method;
    std::size_t iterations = 0;
    bool stabilized = false;
};

// Projected subgradient descent with diminishing steps followed by local
// line-search polish over single coordinates, contiguous row blocks and
// all-row blocks. Intended for m <= 3, n <= 30.
Result minimize(const Problem& p, std::size_t budget = 1000000);

// Dense Gaussian elimination with partial pivoting on a full matrix copy of
// a symmetric tridiagonal system; O(n^3), test scale only.
std::vector<double> dense_tridiag_solve(const std::vector<double>& diag,
                                        const std::vector<double>& sub,
                                        const std::vector<double>& rhs);

// Banded LU with partial pivoting for tridiagonal systems; O(n), an
// independent route for sizes where a dense copy is infeasible.
std::vector<double> banded_tridiag_solve(const std::vector<double>& diag,
                                         const std::vector<double>& sub,
                                         const std::vector<double>& rhs);

}  // namespace gflseg::oracle
