#pragma once

#include <cstddef>
#include <vector>

#include "gflseg/solver.hpp"
#include "gflseg/types.hpp"

namespace gflseg {

// Data-adaptive jump threshold: gamma = max(a*sigma, min(Dmax, b*sigma)),
// cutoff = c*gamma.
struct ThresholdRule {
    double a = 1.0;
    double b = 5.0;
    double c = 0.2;
    void validate() const;
};

struct Segment {
    std::size_t start = 0;   // locus index, inclusive
    std::size_t end = 0;     // locus index, inclusive
    double mean_beta = 0.0;  // fitted level
    double mean_raw = 0.0;   // mean of observed raw data (debiased level)
    bool has_raw = false;    // false when no raw observation falls inside
    std::size_t length() const { return end - start + 1; }
};

// Segmentation of one sequence: change points are 0-based indices of the
// first locus of segments 2..K.
struct SegmentationRow {
    std::vector<std::size_t> change_points;
    std::vector<Segment> segments;
};

// Successive differences d[j] = beta[j+1] - beta[j], length N-1.
std::vector<double> extract_jumps(const double* beta_row, std::size_t n);
std::vector<double> extract_jumps(const GflSolution& sol, std::size_t row);

// Ruler thresholding: keeps jumps with |d| strictly above c*gamma. Returned
// change points are the indices j+1 (first locus right of the kept jump).
std::vector<std::size_t> threshold_ruler(const std::vector<double>& jumps, double sigma,
                                         const ThresholdRule& rule);

// mBIC selection: jumps are ranked by |d| descending and the top-k model is
// scored by Gaussian log-likelihood gain minus 1.5*k*log(N) minus
// 0.5*sum(log(L_k/N)); returns the argmax model's change points.
// k_max <= min(50, N/10) candidates are examined.
std::vector<std::size_t> threshold_mbic(const std::vector<double>& y_row,
                                        const std::vector<std::uint8_t>& mask,
                                        const std::vector<double>& jumps, double sigma);

// Builds segments between consecutive change points; mean_beta is the mean
// of the fitted row over each segment. Raw means are filled in afterwards
// when data is attached.
SegmentationRow build_segmentation(const double* beta_row, std::size_t n,
                                   const std::vector<std::size_t>& change_points);

// Recomputes mean_raw for each segment as the mean of observed raw values.
void attach_raw_means(SegmentationRow& row, const SignalMatrix& y, std::size_t seq);

// Union of two change-point sets on the same grid.
std::vector<std::size_t> merge_changepoints(const std::vector<std::size_t>& a,
                                            const std::vector<std::size_t>& b);

enum class ThresholdMethod { kRuler, kMbic };

// Full per-row pipeline: jumps -> threshold -> segments (+ raw means).
std::vector<SegmentationRow> segment_solution(const GflSolution& sol, const SignalMatrix& y,
                                              const NoiseScale& scales,
                                              const ThresholdRule& rule,
                                              ThresholdMethod method = ThresholdMethod::kRuler);

}  // namespace gflseg
