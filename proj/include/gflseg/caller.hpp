#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "gflseg/types.hpp"

namespace gflseg {

enum class BafLikelihoodMode { kMixture, kMax };

// Configuration of the copy-number caller.
struct CallerConfig {
    double r1 = 10.0;                  // log-likelihood-ratio cutoff
    double r2 = 1.0;                   // LRR-mean multiplier (gains)
    std::optional<double> r2_del;      // deletion-specific override
    std::optional<double> p_a;         // population allele frequencies
    std::optional<double> p_b;         // (p_a + p_b must be 1)
    double sigma_x = 0.03;             // BAF noise scale
    double mu2 = 0.0;                  // CN=2 LRR baseline
    double sigma2 = 0.2;
    BafLikelihoodMode mode = BafLikelihoodMode::kMixture;

    double r2_for_state(int state) const {
        return (state < 2 && r2_del) ? *r2_del : r2;
    }
    void validate() const;
};

struct CnvCall {
    std::size_t start = 0;  // locus indices, inclusive
    std::size_t end = 0;
    int state = 2;
    // LR(c) for c in {0,1,3,4}, in that order.
    std::array<double, 4> lr{};
    bool passed_r1 = false;
    bool passed_r2 = false;
    double lrr_mean = 0.0;
    std::size_t n_loci = 0;
    std::size_t n_baf = 0;
};

inline constexpr std::array<int, 4> kCandidateStates{0, 1, 3, 4};

// BAF density under copy-number state c. Mixture mode weights the genotype
// clusters binomially by (p_a, p_b); max mode takes the best cluster.
// Boundary clusters are half normals (2*phi on the inward side); CN=0 is a
// flat normal at 1/2 with 10*sigma_x.
double baf_likelihood(double x, int c, const CallerConfig& cfg, BafLikelihoodMode mode);

// Segment LRR log-likelihood under state c: for c != 2 the Gaussian
// parameters are the segment's own mean/SD, for c == 2 the (mu2, sigma2)
// baseline from the config.
double lrr_loglik(const std::vector<double>& y_seg, int c, const CallerConfig& cfg);

// Eq-style log-likelihood ratio LR(c) = BAF log-ratio + LRR log-ratio, both
// against c = 2.
double lr_state(const std::vector<double>& x_seg, const std::vector<double>& y_seg,
                int c, const CallerConfig& cfg);

// Assigns the argmax state, gated by LR > r1 and |mean LRR| > r2*sigma2;
// otherwise state 2. BAF markers may be fewer than LRR markers.
CnvCall call_segment(const std::vector<double>& x_seg, const std::vector<double>& y_seg,
                     const CallerConfig& cfg);

// Empirical SD of BAF values inside (0.4, 0.6); falls back to fallback when
// fewer than 20 markers qualify.
double estimate_sigma_x(const std::vector<double>& baf, const std::vector<std::uint8_t>& mask,
                        double fallback = 0.03);

// CN=2 LRR baseline from the whole chromosome (flank = 0) or from a window
// of `flank` markers on each side of [start, end].
void estimate_lrr_baseline(const std::vector<double>& lrr, const std::vector<std::uint8_t>& mask,
                           std::size_t start, std::size_t end, std::size_t flank,
                           double& mu2, double& sigma2);

}  // namespace gflseg
