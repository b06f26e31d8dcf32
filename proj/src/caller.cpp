#include "gflseg/caller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gflseg {

void CallerConfig::validate() const {
    if (!(r1 > 0)) throw std::invalid_argument("r1 must be positive");
    if (!(r2 > 0)) throw std::invalid_argument("r2 must be positive");
    if (r2_del && !(*r2_del > 0)) throw std::invalid_argument("r2_del must be positive");
    if (!(sigma_x > 0)) throw std::invalid_argument("sigma_x must be positive");
    if (!(sigma2 > 0)) throw std::invalid_argument("sigma2 must be positive");
    if (p_a.has_value() != p_b.has_value())
        throw std::invalid_argument("p_a and p_b must be supplied together");
    if (p_a && std::fabs(*p_a + *p_b - 1.0) > 1e-9)
        throw std::invalid_argument("p_a + p_b must equal 1");
}

namespace {

constexpr double kInv2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)
constexpr double kLogFloor = 1e-300;

double normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return kInv2Pi / sigma * std::exp(-0.5 * z * z);
}

// Half normal at a BAF boundary: 2*phi on the inward side. BAF lives in
// [0,1], so the inward condition always holds there.
double half_normal_pdf(double x, double mu, double sigma) {
    return 2.0 * normal_pdf(x, mu, sigma);
}

double binom_coeff(int c, int s) {
    static const double table[5][5] = {{1, 0, 0, 0, 0},
                                       {1, 1, 0, 0, 0},
                                       {1, 2, 1, 0, 0},
                                       {1, 3, 3, 1, 0},
                                       {1, 4, 6, 4, 1}};
    return table[c][s];
}

// Cluster density phi_s for copy number c: half normals at the homozygous
// boundaries, normals at the interior genotype fractions s/c, and a flat
// normal at 1/2 with 10*sigma_x for the null state.
double cluster_pdf(double x, int c, int s, double sigma_x) {
    if (c == 0) return normal_pdf(x, 0.5, 10.0 * sigma_x);
    if (s == 0) return half_normal_pdf(x, 0.0, sigma_x);
    if (s == c) return half_normal_pdf(x, 1.0, sigma_x);
    return normal_pdf(x, static_cast<double>(s) / static_cast<double>(c), sigma_x);
}

}  // namespace

double baf_likelihood(double x, int c, const CallerConfig& cfg, BafLikelihoodMode mode) {
    if (c < 0 || c > 4) throw std::invalid_argument("copy-number state must be in 0..4");
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("BAF outside [0,1]");
    if (mode == BafLikelihoodMode::kMixture) {
        if (!cfg.p_a || !cfg.p_b)
            throw std::invalid_argument("mixture mode needs allele frequencies");
        const double pa = *cfg.p_a;
        const double pb = *cfg.p_b;
        double total = 0.0;
        for (int s = 0; s <= std::max(c, 0); ++s) {
            const double weight =
                binom_coeff(c, s) * std::pow(pa, c - s) * std::pow(pb, s);
            total += weight * cluster_pdf(x, c, s, cfg.sigma_x);
            if (c == 0) break;  // single null cluster
        }
        return total;
    }
    double best = 0.0;
    for (int s = 0; s <= std::max(c, 0); ++s) {
        best = std::max(best, cluster_pdf(x, c, s, cfg.sigma_x));
        if (c == 0) break;
    }
    return best;
}

double lrr_loglik(const std::vector<double>& y_seg, int c, const CallerConfig& cfg) {
    if (y_seg.empty()) throw std::invalid_argument("empty segment");
    double mu, sigma;
    if (c == 2) {
        mu = cfg.mu2;
        sigma = cfg.sigma2;
    } else {
        double sum = 0.0;
        for (double v : y_seg) sum += v;
        mu = sum / static_cast<double>(y_seg.size());
        if (y_seg.size() < 2) {
            sigma = cfg.sigma2;  // SD undefined on one point
        } else {
            double ss = 0.0;
            for (double v : y_seg) ss += (v - mu) * (v - mu);
            sigma = std::sqrt(ss / static_cast<double>(y_seg.size() - 1));
            if (!(sigma > 1e-12)) sigma = cfg.sigma2;
        }
    }
    double ll = 0.0;
    for (double v : y_seg) ll += std::log(std::max(normal_pdf(v, mu, sigma), kLogFloor));
    return ll;
}

double lr_state(const std::vector<double>& x_seg, const std::vector<double>& y_seg,
                int c, const CallerConfig& cfg) {
    cfg.validate();
    const BafLikelihoodMode mode =
        (cfg.p_a && cfg.p_b) ? cfg.mode : BafLikelihoodMode::kMax;
    double lr = 0.0;
    for (double x : x_seg) {
        const double num = std::max(baf_likelihood(x, c, cfg, mode), kLogFloor);
        const double den = std::max(baf_likelihood(x, 2, cfg, mode), kLogFloor);
        lr += std::log(num) - std::log(den);
    }
    if (!y_seg.empty()) lr += lrr_loglik(y_seg, c, cfg) - lrr_loglik(y_seg, 2, cfg);
    return lr;
}

CnvCall call_segment(const std::vector<double>& x_seg, const std::vector<double>& y_seg,
                     const CallerConfig& cfg) {
    cfg.validate();
    if (y_seg.empty() && x_seg.empty()) throw std::invalid_argument("empty segment");

    CnvCall call;
    call.n_baf = x_seg.size();
    double lrr_mean = 0.0;
    for (double v : y_seg) lrr_mean += v;
    call.lrr_mean = y_seg.empty() ? 0.0 : lrr_mean / static_cast<double>(y_seg.size());

    int best_state = kCandidateStates[0];
    double best_lr = 0.0;
    for (std::size_t k = 0; k < kCandidateStates.size(); ++k) {
        const int c = kCandidateStates[k];
        call.lr[k] = lr_state(x_seg, y_seg, c, cfg);
        if (k == 0 || call.lr[k] > best_lr) {
            best_lr = call.lr[k];
            best_state = c;
        }
    }

    call.passed_r1 = best_lr > cfg.r1;
    call.passed_r2 =
        !y_seg.empty() && std::fabs(call.lrr_mean - cfg.mu2) > cfg.r2_for_state(best_state) * cfg.sigma2;
    call.state = (call.passed_r1 && call.passed_r2) ? best_state : 2;
    return call;
}

double estimate_sigma_x(const std::vector<double>& baf, const std::vector<std::uint8_t>& mask,
                        double fallback) {
    std::vector<double> band;
    for (std::size_t j = 0; j < baf.size(); ++j) {
        if (!mask[j]) continue;
        if (baf[j] > 0.4 && baf[j] < 0.6) band.push_back(baf[j]);
    }
    if (band.size() < 20) return fallback;
    double mean = 0.0;
    for (double v : band) mean += v;
    mean /= static_cast<double>(band.size());
    double ss = 0.0;
    for (double v : band) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(band.size() - 1));
}

void estimate_lrr_baseline(const std::vector<double>& lrr, const std::vector<std::uint8_t>& mask,
                           std::size_t start, std::size_t end, std::size_t flank,
                           double& mu2, double& sigma2) {
    std::vector<double> pool;
    if (flank == 0) {
        for (std::size_t j = 0; j < lrr.size(); ++j)
            if (mask[j]) pool.push_back(lrr[j]);
    } else {
        std::size_t got = 0;
        for (std::size_t j = start; j-- > 0 && got < flank;) {
            if (mask[j]) {
                pool.push_back(lrr[j]);
                ++got;
            }
        }
        got = 0;
        for (std::size_t j = end + 1; j < lrr.size() && got < flank; ++j) {
            if (mask[j]) {
                pool.push_back(lrr[j]);
                ++got;
            }
        }
    }
    if (pool.size() < 2) throw std::runtime_error("not enough data for LRR baseline");
    double mean = 0.0;
    for (double v : pool) mean += v;
    mean /= static_cast<double>(pool.size());
    double ss = 0.0;
    for (double v : pool) ss += (v - mean) * (v - mean);
    mu2 = mean;
    sigma2 = std::max(std::sqrt(ss / static_cast<double>(pool.size() - 1)), 1e-6);
}

}  // namespace gflseg
