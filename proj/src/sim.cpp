#include "gflseg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gflseg/rng.hpp"

namespace gflseg {

int cnv_state(CnvType type) {
    switch (type) {
        case CnvType::kLoss1: return 1;
        case CnvType::kLoss2: return 0;
        case CnvType::kGain1: return 3;
        case CnvType::kGain2: return 4;
        case CnvType::kCnloh: return 2;
    }
    return 2;
}

std::string to_string(CnvType type) {
    switch (type) {
        case CnvType::kLoss1: return "loss1";
        case CnvType::kLoss2: return "loss2";
        case CnvType::kGain1: return "gain1";
        case CnvType::kGain2: return "gain2";
        case CnvType::kCnloh: return "cnloh";
    }
    return "?";
}

CnvType cnv_type_from_string(const std::string& text) {
    if (text == "loss1") return CnvType::kLoss1;
    if (text == "loss2") return CnvType::kLoss2;
    if (text == "gain1") return CnvType::kGain1;
    if (text == "gain2") return CnvType::kGain2;
    if (text == "cnloh") return CnvType::kCnloh;
    throw std::invalid_argument("unknown CNV type: " + text);
}

void CnvSpec::validate(std::size_t n_loci) const {
    if (length < 1) throw std::invalid_argument("CNV length must be >= 1");
    if (start + length > n_loci) throw std::invalid_argument("CNV exceeds the grid");
}

double SimConfig::shift_for(CnvType type) const {
    switch (type) {
        case CnvType::kLoss1: return lrr_shift_cn1;
        case CnvType::kLoss2: return lrr_shift_cn0;
        case CnvType::kGain1: return lrr_shift_cn3;
        case CnvType::kGain2: return lrr_shift_cn4;
        case CnvType::kCnloh: return 0.0;
    }
    return 0.0;
}

namespace {

// Stream ids; fixed so draws never depend on call order or thread count.
enum : std::uint64_t {
    kStreamGenotype = 0,
    kStreamNormalLrr = 1,
    kStreamNormalBaf = 2,
    kStreamTumorLrr = 3,
    kStreamTumorBaf = 4,
    kStreamAllele = 5,
};

double clip01(double x) { return std::min(1.0, std::max(0.0, x)); }

// BAF draw around a genotype cluster. Boundary clusters use folded noise
// (the half-normal shape the caller models) at the tighter homozygous
// scale; interior clusters are plain normals clipped to [0,1].
double draw_baf(double cluster, const SimConfig& cfg, Rng& rng) {
    if (cluster == 0.0) return clip01(std::fabs(cfg.baf_sigma_homo * rng.normal()));
    if (cluster == 1.0) return clip01(1.0 - std::fabs(cfg.baf_sigma_homo * rng.normal()));
    return clip01(cluster + cfg.baf_sigma * rng.normal());
}

struct SampleStreams {
    Rng lrr;
    Rng baf;
    Rng allele;
};

// Sequence of per-locus states and genotypes -> one subject's LRR/BAF rows.
SimulatedSample render_sample(const SimConfig& cfg, const std::vector<CnvSpec>& cnvs,
                              const std::vector<int>& b_count, SampleStreams& streams) {
    const std::size_t n = cfg.n_loci;
    SimulatedSample out;
    out.truth_states.assign(n, 2);
    out.het_mask.assign(n, 0);

    std::vector<int> region_of(n, -1);
    for (std::size_t r = 0; r < cnvs.size(); ++r) {
        cnvs[r].validate(n);
        TruthRegion region;
        region.start = cnvs[r].start;
        region.end = cnvs[r].start + cnvs[r].length - 1;
        region.type = cnvs[r].type;
        region.state = cnv_state(cnvs[r].type);
        out.regions.push_back(region);
        for (std::size_t j = region.start; j <= region.end; ++j) {
            if (region_of[j] >= 0) throw std::invalid_argument("overlapping CNV regions");
            region_of[j] = static_cast<int>(r);
            out.truth_states[j] = region.state;
        }
    }

    out.signals.resize(2, n);
    out.signals.grid.chromosome = cfg.chromosome;
    for (std::size_t j = 0; j < n; ++j)
        out.signals.grid.positions[j] = static_cast<long long>(j + 1) * cfg.position_step;
    out.signals.labels = {"LRR", "BAF"};
    out.signals.kinds = {SignalKind::kLrr, SignalKind::kBaf};

    for (std::size_t j = 0; j < n; ++j) {
        const int k = b_count[j];  // B-allele copies in the germline genotype
        out.het_mask[j] = (k == 1) ? 1 : 0;
        const CnvType type =
            region_of[j] >= 0 ? cnvs[static_cast<std::size_t>(region_of[j])].type : CnvType::kCnloh;
        const bool in_region = region_of[j] >= 0;

        const double shift = in_region ? cfg.shift_for(type) : 0.0;
        out.signals.set(0, j, shift + cfg.lrr_sigma * streams.lrr.normal(), true);

        double cluster;
        if (!in_region) {
            cluster = static_cast<double>(k) / 2.0;
        } else {
            switch (type) {
                case CnvType::kLoss1:
                    // One haplotype is lost; a het marker keeps A or B.
                    cluster = (k == 1) ? (streams.allele.bernoulli(0.5) ? 1.0 : 0.0)
                                       : (k == 0 ? 0.0 : 1.0);
                    break;
                case CnvType::kLoss2:
                    // No DNA left: diffuse noise around 1/2.
                    out.signals.set(1, j, clip01(0.5 + 10.0 * cfg.baf_sigma *
                                                           streams.baf.normal()),
                                    true);
                    continue;
                case CnvType::kGain1:
                    cluster = (k == 1) ? (streams.allele.bernoulli(0.5) ? 2.0 / 3.0 : 1.0 / 3.0)
                                       : (k == 0 ? 0.0 : 1.0);
                    break;
                case CnvType::kGain2:
                    // A single haplotype is amplified twice.
                    cluster = (k == 1) ? (streams.allele.bernoulli(0.5) ? 0.75 : 0.25)
                                       : (k == 0 ? 0.0 : 1.0);
                    break;
                case CnvType::kCnloh:
                    cluster = (k == 1) ? (streams.allele.bernoulli(0.5) ? 1.0 : 0.0)
                                       : (k == 0 ? 0.0 : 1.0);
                    break;
                default:
                    cluster = static_cast<double>(k) / 2.0;
            }
        }
        out.signals.set(1, j, draw_baf(cluster, cfg, streams.baf), true);
    }
    return out;
}

std::vector<int> draw_genotypes(const SimConfig& cfg, std::uint64_t seed) {
    Rng rng(seed, kStreamGenotype);
    std::vector<int> b_count(cfg.n_loci);
    for (auto& k : b_count) k = rng.binomial(2, cfg.p_b);
    return b_count;
}

}  // namespace

SimulatedSample simulate_normal(const SimConfig& cfg, const std::vector<CnvSpec>& cnvs,
                                std::uint64_t seed) {
    if (cfg.n_loci < 2) throw std::invalid_argument("need at least 2 loci");
    const auto genotypes = draw_genotypes(cfg, seed);
    SampleStreams streams{Rng(seed, kStreamNormalLrr), Rng(seed, kStreamNormalBaf),
                          Rng(seed, kStreamAllele)};
    return render_sample(cfg, cnvs, genotypes, streams);
}

TumorNormalPair simulate_tumor_normal(const SimConfig& cfg, const std::vector<CnvSpec>& cnvs,
                                      std::uint64_t seed) {
    if (cfg.n_loci < 2) throw std::invalid_argument("need at least 2 loci");
    const auto genotypes = draw_genotypes(cfg, seed);
    TumorNormalPair pair;
    {
        SampleStreams streams{Rng(seed, kStreamNormalLrr), Rng(seed, kStreamNormalBaf),
                              Rng(seed, kStreamAllele)};
        pair.normal = render_sample(cfg, {}, genotypes, streams);
    }
    {
        SampleStreams streams{Rng(seed, kStreamTumorLrr), Rng(seed, kStreamTumorBaf),
                              Rng(seed, kStreamAllele)};
        pair.tumor = render_sample(cfg, cnvs, genotypes, streams);
    }
    return pair;
}

SignalMatrix mix_contamination(const SignalMatrix& tumor, const SignalMatrix& normal,
                               double fraction) {
    if (fraction < 0.0 || fraction > 1.0)
        throw std::invalid_argument("fraction must lie in [0,1]");
    if (tumor.n_seq != normal.n_seq || tumor.n_loci() != normal.n_loci() ||
        tumor.grid.chromosome != normal.grid.chromosome ||
        tumor.grid.positions != normal.grid.positions)
        throw std::invalid_argument("grid mismatch in mix_contamination");

    SignalMatrix out = tumor;
    const std::size_t total = tumor.values.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (tumor.mask[idx] && normal.mask[idx]) {
            out.values[idx] = fraction * normal.values[idx] + (1.0 - fraction) * tumor.values[idx];
            out.mask[idx] = 1;
        } else {
            out.values[idx] = 0.0;
            out.mask[idx] = 0;
        }
    }
    return out;
}

}  // namespace gflseg
