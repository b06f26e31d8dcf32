#include "gflseg/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gflseg {

void TuningInputs::validate() const {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must lie in [0,1]");
    const double r = rho_value();
    if (r < 0.0 || r > 1.0) throw std::invalid_argument("rho must lie in [0,1]");
    if (c1 < 0.0 || c2 < 0.0 || c3 < 0.0) throw std::invalid_argument("c1,c2,c3 must be >= 0");
    if (n_loci < 2) throw std::invalid_argument("need at least 2 loci");
    if (n_seq < 1) throw std::invalid_argument("need at least 1 sequence");
}

namespace {

double sample_sd(const std::vector<double>& x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double median_inplace(std::vector<double>& x) {
    const std::size_t n = x.size();
    auto mid = x.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(x.begin(), mid, x.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(x.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace

SigmaEstimate estimate_sigma(const std::vector<double>& values,
                             const std::vector<std::uint8_t>& mask,
                             SigmaEstimator estimator) {
    std::vector<double> diffs;
    diffs.reserve(values.size());
    bool have_prev = false;
    double prev = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!mask[j]) continue;  // differences skip masked entries
        if (have_prev) diffs.push_back(values[j] - prev);
        prev = values[j];
        have_prev = true;
    }
    if (diffs.size() < 2) throw std::invalid_argument("estimate_sigma needs >= 3 observed values");

    double sd = 0.0;
    if (estimator == SigmaEstimator::kSd) {
        sd = sample_sd(diffs);
    } else {
        std::vector<double> work = diffs;
        const double med = median_inplace(work);
        for (std::size_t k = 0; k < diffs.size(); ++k) work[k] = std::fabs(diffs[k] - med);
        sd = 1.4826 * median_inplace(work);
    }

    SigmaEstimate est;
    est.sigma = sd / std::sqrt(2.0);
    if (est.sigma < kSigmaFloor) {
        est.sigma = kSigmaFloor;
        est.degenerate = true;
    }
    return est;
}

NoiseScale estimate_sigma(const SignalMatrix& signals, SigmaEstimator estimator) {
    NoiseScale out;
    out.estimator = estimator;
    const std::size_t n = signals.n_loci();
    for (std::size_t i = 0; i < signals.n_seq; ++i) {
        std::vector<double> row(signals.values.begin() + static_cast<std::ptrdiff_t>(i * n),
                                signals.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
        std::vector<std::uint8_t> mask(signals.mask.begin() + static_cast<std::ptrdiff_t>(i * n),
                                       signals.mask.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
        auto est = estimate_sigma(row, mask, estimator);
        out.sigmas.push_back(est.sigma);
        out.degenerate.push_back(est.degenerate ? 1 : 0);
    }
    return out;
}

PenaltyConfig compute_lambdas(const TuningInputs& inputs, const NoiseScale& scales) {
    inputs.validate();
    if (scales.sigmas.size() != inputs.n_seq)
        throw std::invalid_argument("sigma count does not match n_seq");
    const double rho = inputs.rho_value();
    const double root_log_n = std::sqrt(std::log(static_cast<double>(inputs.n_loci)));
    const double root_pm = std::sqrt(inputs.p * static_cast<double>(inputs.n_seq));

    PenaltyConfig cfg;
    for (double sigma : scales.sigmas) {
        cfg.lambda1.push_back(inputs.c1 * sigma);
        cfg.lambda2.push_back(rho * inputs.c2 * sigma * root_log_n);
        cfg.lambda3.push_back((1.0 - rho) * inputs.c3 * sigma * root_pm * root_log_n);
    }
    return cfg;
}

BiasPrediction predict_bias(double lambda1, double lambda2, double lambda3,
                            std::size_t segment_length, std::size_t sharers) {
    if (segment_length < 1) throw std::invalid_argument("segment length must be >= 1");
    if (sharers < 1) throw std::invalid_argument("sharers must be >= 1");
    BiasPrediction b;
    b.bias1 = lambda1;
    b.bias2 = lambda2 / static_cast<double>(segment_length);
    b.bias3 = lambda3 / (static_cast<double>(segment_length) *
                         std::sqrt(static_cast<double>(sharers)));
    return b;
}

}  // namespace gflseg
