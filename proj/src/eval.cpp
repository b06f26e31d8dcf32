#include "gflseg/eval.hpp"

#include <stdexcept>

namespace gflseg {

EvalReport evaluate_per_snp(const std::vector<int>& truth_states,
                            const std::vector<int>& called_states) {
    if (truth_states.size() != called_states.size())
        throw std::invalid_argument("truth/call grid mismatch");
    EvalReport rep;
    for (std::size_t j = 0; j < truth_states.size(); ++j) {
        const bool truth_cnv = truth_states[j] != 2;
        const bool called_cnv = called_states[j] != 2;
        if (truth_cnv) {
            ++rep.n_cnv_snps;
            if (called_cnv) ++rep.n_cnv_called;
        }
        if (called_cnv) {
            ++rep.n_called_snps;
            if (!truth_cnv) ++rep.n_false_calls;
        }
    }
    rep.tpr = rep.n_cnv_snps ? static_cast<double>(rep.n_cnv_called) /
                                   static_cast<double>(rep.n_cnv_snps)
                             : 0.0;
    rep.fdr = rep.n_called_snps ? static_cast<double>(rep.n_false_calls) /
                                      static_cast<double>(rep.n_called_snps)
                                : 0.0;
    return rep;
}

EvalReport evaluate_het(const std::vector<int>& truth_states,
                        const std::vector<TruthRegion>& regions,
                        const std::vector<int>& called_states,
                        const std::vector<std::uint8_t>& het_mask) {
    const std::size_t n = truth_states.size();
    if (called_states.size() != n || het_mask.size() != n)
        throw std::invalid_argument("truth/call/het grid mismatch");

    EvalReport rep;
    std::vector<std::uint8_t> in_region(n, 0);
    for (const auto& region : regions) {
        if (region.end >= n) throw std::invalid_argument("region outside grid");
        std::size_t correct = 0, total = 0;
        for (std::size_t j = region.start; j <= region.end; ++j) {
            in_region[j] = 1;
            if (!het_mask[j]) continue;
            ++total;
            if (called_states[j] == region.state) ++correct;
        }
        rep.n_het_in_regions += total;
        rep.n_het_correct += correct;
        rep.region_sensitivity.push_back(
            total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (in_region[j] || !het_mask[j]) continue;
        ++rep.n_het_outside;
        if (called_states[j] == 2) ++rep.n_het_outside_normal;
    }
    rep.sensitivity = rep.n_het_in_regions
                          ? static_cast<double>(rep.n_het_correct) /
                                static_cast<double>(rep.n_het_in_regions)
                          : 0.0;
    rep.specificity = rep.n_het_outside
                          ? static_cast<double>(rep.n_het_outside_normal) /
                                static_cast<double>(rep.n_het_outside)
                          : 1.0;
    return rep;
}

}  // namespace gflseg
