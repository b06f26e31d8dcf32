#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gflseg/types.hpp"

namespace gflseg {

enum class CnvType { kLoss1, kLoss2, kGain1, kGain2, kCnloh };

int cnv_state(CnvType type);  // copy-number state: 1, 0, 3, 4, 2
std::string to_string(CnvType type);
CnvType cnv_type_from_string(const std::string& text);

// One imposed region, in 0-based locus indices.
struct CnvSpec {
    std::size_t start = 0;
    std::size_t length = 0;
    CnvType type = CnvType::kLoss1;
    void validate(std::size_t n_loci) const;
};

// Effect-size model for the simulator. LRR shifts per state are artifact
// defaults mimicking Illumina-like SNR, not published values.
struct SimConfig {
    std::size_t n_loci = 13000;
    double lrr_sigma = 0.2;
    double baf_sigma = 0.03;
    // Homozygous clusters are much tighter than heterozygous ones on real
    // arrays; a looser value would leak homozygous markers into the mBAF
    // heterozygous band.
    double baf_sigma_homo = 0.005;
    double p_b = 0.5;                      // population B-allele frequency
    double lrr_shift_cn0 = -3.0;
    double lrr_shift_cn1 = -0.66;
    double lrr_shift_cn3 = 0.4;
    double lrr_shift_cn4 = 0.7;
    std::string chromosome = "1";
    long long position_step = 1000;

    double shift_for(CnvType type) const;
};

struct TruthRegion {
    std::size_t start = 0;  // inclusive
    std::size_t end = 0;    // inclusive
    int state = 2;
    CnvType type = CnvType::kLoss1;
};

// Simulated subject: LRR row + BAF row on a shared grid, per-locus truth
// states, the original (germline) heterozygosity mask, and the imposed
// regions.
struct SimulatedSample {
    SignalMatrix signals;  // row 0: LRR, row 1: BAF
    std::vector<int> truth_states;
    std::vector<std::uint8_t> het_mask;
    std::vector<TruthRegion> regions;
};

// Draws a normal sample and imposes the given regions. Deterministic under
// (seed): same seed, same output, independent of platform.
SimulatedSample simulate_normal(const SimConfig& cfg, const std::vector<CnvSpec>& cnvs,
                                std::uint64_t seed);

// In-silico dilution: w*normal + (1-w)*tumor per locus for both LRR and BAF
// (linear blend). Grids must match; a cell is observed iff observed in both.
SignalMatrix mix_contamination(const SignalMatrix& tumor, const SignalMatrix& normal,
                               double fraction);

// Paired tumor/normal with shared germline genotypes, for dilution studies.
struct TumorNormalPair {
    SimulatedSample tumor;
    SimulatedSample normal;  // same genotypes, no regions
};

TumorNormalPair simulate_tumor_normal(const SimConfig& cfg, const std::vector<CnvSpec>& cnvs,
                                      std::uint64_t seed);

}  // namespace gflseg
