#pragma once

#include <cstdint>
#include <vector>

#include "gflseg/sim.hpp"

namespace gflseg {

struct EvalReport {
    // Per-SNP detection rates.
    double tpr = 0.0;
    double fdr = 0.0;
    std::size_t n_cnv_snps = 0;        // truth != 2
    std::size_t n_cnv_called = 0;      // truth != 2 and called != 2
    std::size_t n_called_snps = 0;     // called != 2
    std::size_t n_false_calls = 0;     // called != 2 but truth == 2

    // Heterozygous-SNP rates (contamination-style evaluation).
    double sensitivity = 0.0;
    double specificity = 0.0;
    std::size_t n_het_in_regions = 0;
    std::size_t n_het_correct = 0;
    std::size_t n_het_outside = 0;
    std::size_t n_het_outside_normal = 0;
    std::vector<double> region_sensitivity;  // one entry per truth region
};

// Per-SNP TPR/FDR: TPR = fraction of truly-CNV SNPs called non-2, FDR =
// fraction of called-CNV SNPs that are truly normal (0 when nothing is
// called).
EvalReport evaluate_per_snp(const std::vector<int>& truth_states,
                            const std::vector<int>& called_states);

// Heterozygous-SNP sensitivity/specificity: sensitivity counts het SNPs
// inside truth regions assigned exactly the region's state; specificity
// counts het SNPs outside all regions assigned CN=2.
EvalReport evaluate_het(const std::vector<int>& truth_states,
                        const std::vector<TruthRegion>& regions,
                        const std::vector<int>& called_states,
                        const std::vector<std::uint8_t>& het_mask);

}  // namespace gflseg
