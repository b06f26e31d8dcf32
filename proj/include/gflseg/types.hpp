#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gflseg {

// Sigma estimates are floored at this value (normalized units) so constant
// sequences never divide by zero; such rows are flagged degenerate.
inline constexpr double kSigmaFloor = 1e-6;

// Default half-width of the heterozygous BAF band: markers with BAF in
// [t, 1-t] are treated as heterozygous by the mBAF transform.
inline constexpr double kDefaultHetBand = 0.03;

enum class SignalKind { kGeneric, kLrr, kBaf, kMbaf };

std::string to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& text);

// Shared locus grid for one chromosome: strictly increasing basepair
// positions.
struct LocusGrid {
    std::string chromosome;
    std::vector<long long> positions;

    std::size_t size() const { return positions.size(); }
    // Throws std::invalid_argument on non-monotone positions or fewer than 2
    // loci.
    void validate() const;
};

// M sequences observed on a common grid. mask(i,j)=0 marks a missing value;
// masked cells are never read by any downstream computation.
struct SignalMatrix {
    LocusGrid grid;
    std::size_t n_seq = 0;
    std::vector<double> values;      // row-major M x N
    std::vector<std::uint8_t> mask;  // row-major M x N
    std::vector<std::string> labels;
    std::vector<SignalKind> kinds;

    std::size_t n_loci() const { return grid.size(); }

    double value(std::size_t i, std::size_t j) const { return values[i * n_loci() + j]; }
    double& value(std::size_t i, std::size_t j) { return values[i * n_loci() + j]; }
    bool observed(std::size_t i, std::size_t j) const { return mask[i * n_loci() + j] != 0; }
    void set(std::size_t i, std::size_t j, double v, bool obs = true) {
        values[i * n_loci() + j] = v;
        mask[i * n_loci() + j] = obs ? 1 : 0;
    }

    void resize(std::size_t m, std::size_t n) {
        n_seq = m;
        grid.positions.resize(n);
        values.assign(m * n, 0.0);
        mask.assign(m * n, 1);
        labels.resize(m);
        kinds.resize(m, SignalKind::kGeneric);
    }

    std::size_t observed_count(std::size_t i) const {
        std::size_t c = 0;
        for (std::size_t j = 0; j < n_loci(); ++j) c += observed(i, j) ? 1 : 0;
        return c;
    }

    void validate() const;
};

enum class SigmaEstimator { kSd, kMad };

// Per-sequence robust noise scale.
struct NoiseScale {
    std::vector<double> sigmas;
    SigmaEstimator estimator = SigmaEstimator::kSd;
    // Rows whose raw estimate hit the floor (constant input).
    std::vector<std::uint8_t> degenerate;
};

}  // namespace gflseg
