#pragma once

#include <optional>
#include <vector>

#include "gflseg/solver.hpp"
#include "gflseg/types.hpp"

namespace gflseg {

// Inputs for the penalty rules: lambda1 = c1*sigma, lambda2 =
// rho*c2*sigma*sqrt(log N), lambda3 = (1-rho)*c3*sigma*sqrt(p*M)*sqrt(log N),
// with rho = 1-p unless overridden.
struct TuningInputs {
    double c1 = 0.1;
    double c2 = 2.0;
    double c3 = 2.0;
    double p = 1.0;                 // anticipated carrier proportion
    std::optional<double> rho;      // override for rho(p)
    std::size_t n_loci = 0;
    std::size_t n_seq = 0;

    double rho_value() const { return rho ? *rho : 1.0 - p; }
    void validate() const;
};

struct SigmaEstimate {
    double sigma = 0.0;
    bool degenerate = false;
};

// Robust noise scale from first-order differences of consecutive observed
// values: sigma = SD(diff)/sqrt(2), where SD is the sample standard
// deviation or 1.4826*MAD. Requires at least 3 observed values. Floored at
// kSigmaFloor.
SigmaEstimate estimate_sigma(const std::vector<double>& values,
                             const std::vector<std::uint8_t>& mask,
                             SigmaEstimator estimator);

// All rows of a matrix.
NoiseScale estimate_sigma(const SignalMatrix& signals, SigmaEstimator estimator);

// Penalty vectors per the tuning rules; homogeneous of degree 1 in sigma.
PenaltyConfig compute_lambdas(const TuningInputs& inputs, const NoiseScale& scales);

struct BiasPrediction {
    double bias1 = 0.0;  // ~ lambda1
    double bias2 = 0.0;  // ~ lambda2 / L
    double bias3 = 0.0;  // ~ lambda3 / (L * sqrt(m))
};

// First-order bias of a fitted segment of length L shared by m sequences.
BiasPrediction predict_bias(double lambda1, double lambda2, double lambda3,
                            std::size_t segment_length, std::size_t sharers);

}  // namespace gflseg
