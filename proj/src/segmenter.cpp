#include "gflseg/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gflseg {

void ThresholdRule::validate() const {
    if (!(a < b)) throw std::invalid_argument("threshold rule needs a < b");
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("threshold rule needs 0 < c < 1");
    if (a <= 0.0) throw std::invalid_argument("threshold rule needs a > 0");
}

std::vector<double> extract_jumps(const double* beta_row, std::size_t n) {
    std::vector<double> d(n - 1);
    for (std::size_t b = 1; b < n; ++b) d[b - 1] = beta_row[b] - beta_row[b - 1];
    return d;
}

std::vector<double> extract_jumps(const GflSolution& sol, std::size_t row) {
    return extract_jumps(sol.row(row), sol.n_loci);
}

std::vector<std::size_t> threshold_ruler(const std::vector<double>& jumps, double sigma,
                                         const ThresholdRule& rule) {
    rule.validate();
    if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
    double d_max = 0.0;
    for (double d : jumps) d_max = std::max(d_max, std::fabs(d));
    const double gamma = std::max(rule.a * sigma, std::min(d_max, rule.b * sigma));
    const double cutoff = rule.c * gamma;
    std::vector<std::size_t> cps;
    for (std::size_t b = 0; b < jumps.size(); ++b) {
        if (std::fabs(jumps[b]) > cutoff) cps.push_back(b + 1);
    }
    return cps;
}

namespace {

// Residual sum of squares of the observed values under the piecewise-
// constant fit defined by the given change points.
double rss_for_model(const std::vector<double>& y, const std::vector<std::uint8_t>& mask,
                     const std::vector<std::size_t>& cps, std::vector<double>& seg_log_len,
                     std::size_t n) {
    seg_log_len.clear();
    double rss = 0.0;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= cps.size(); ++k) {
        const std::size_t end = (k < cps.size() ? cps[k] : n);  // exclusive
        double sum = 0.0, cnt = 0.0;
        for (std::size_t j = start; j < end; ++j) {
            if (!mask[j]) continue;
            sum += y[j];
            cnt += 1.0;
        }
        const double mean = cnt > 0 ? sum / cnt : 0.0;
        for (std::size_t j = start; j < end; ++j) {
            if (!mask[j]) continue;
            rss += (y[j] - mean) * (y[j] - mean);
        }
        seg_log_len.push_back(std::log(static_cast<double>(end - start) /
                                       static_cast<double>(n)));
        start = end;
    }
    return rss;
}

}  // namespace

std::vector<std::size_t> threshold_mbic(const std::vector<double>& y_row,
                                        const std::vector<std::uint8_t>& mask,
                                        const std::vector<double>& jumps, double sigma) {
    const std::size_t n = y_row.size();
    if (jumps.size() + 1 != n) throw std::invalid_argument("jump vector length mismatch");
    if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");

    // Candidate boundaries ranked by |jump| descending; zero jumps are not
    // candidates at all.
    std::vector<std::size_t> order(jumps.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(jumps[a]) > std::fabs(jumps[b]);
    });
    std::size_t k_max = std::min<std::size_t>(50, n / 10);
    while (k_max > 0 && std::fabs(jumps[order[k_max - 1]]) == 0.0) --k_max;

    std::vector<double> seg_log_len;
    std::vector<std::size_t> cps;
    const double rss0 = rss_for_model(y_row, mask, cps, seg_log_len, n);
    const double log_n = std::log(static_cast<double>(n));

    double best_score = 0.0;  // k = 0 scores 0 by construction
    std::size_t best_k = 0;
    std::vector<std::size_t> chosen;
    for (std::size_t k = 1; k <= k_max; ++k) {
        chosen.push_back(order[k - 1] + 1);
        std::vector<std::size_t> sorted = chosen;
        std::sort(sorted.begin(), sorted.end());
        const double rss = rss_for_model(y_row, mask, sorted, seg_log_len, n);
        const double ll_gain = (rss0 - rss) / (2.0 * sigma * sigma);
        double len_term = 0.0;
        for (double v : seg_log_len) len_term += v;
        const double score = ll_gain - 1.5 * static_cast<double>(k) * log_n - 0.5 * len_term;
        if (score > best_score) {
            best_score = score;
            best_k = k;
        }
    }

    std::vector<std::size_t> result(order.begin(),
                                    order.begin() + static_cast<std::ptrdiff_t>(best_k));
    for (auto& b : result) b += 1;
    std::sort(result.begin(), result.end());
    return result;
}

SegmentationRow build_segmentation(const double* beta_row, std::size_t n,
                                   const std::vector<std::size_t>& change_points) {
    for (std::size_t k = 0; k < change_points.size(); ++k) {
        if (change_points[k] < 1 || change_points[k] >= n)
            throw std::invalid_argument("change point out of range");
        if (k > 0 && change_points[k] <= change_points[k - 1])
            throw std::invalid_argument("change points must be sorted and distinct");
    }
    SegmentationRow row;
    row.change_points = change_points;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= change_points.size(); ++k) {
        const std::size_t end = (k < change_points.size() ? change_points[k] : n);
        Segment seg;
        seg.start = start;
        seg.end = end - 1;
        double sum = 0.0;
        for (std::size_t j = start; j < end; ++j) sum += beta_row[j];
        seg.mean_beta = sum / static_cast<double>(end - start);
        row.segments.push_back(seg);
        start = end;
    }
    return row;
}

void attach_raw_means(SegmentationRow& row, const SignalMatrix& y, std::size_t seq) {
    const std::size_t n = y.n_loci();
    for (auto& seg : row.segments) {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (std::size_t j = seg.start; j <= seg.end && j < n; ++j) {
            if (!y.observed(seq, j)) continue;
            sum += y.value(seq, j);
            ++cnt;
        }
        seg.has_raw = cnt > 0;
        seg.mean_raw = seg.has_raw ? sum / static_cast<double>(cnt) : seg.mean_beta;
    }
}

std::vector<std::size_t> merge_changepoints(const std::vector<std::size_t>& a,
                                            const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<SegmentationRow> segment_solution(const GflSolution& sol, const SignalMatrix& y,
                                              const NoiseScale& scales,
                                              const ThresholdRule& rule,
                                              ThresholdMethod method) {
    if (scales.sigmas.size() != sol.n_seq) throw std::invalid_argument("scale count mismatch");
    std::vector<SegmentationRow> rows;
    const std::size_t n = sol.n_loci;
    for (std::size_t i = 0; i < sol.n_seq; ++i) {
        const auto jumps = extract_jumps(sol, i);
        std::vector<std::size_t> cps;
        if (method == ThresholdMethod::kRuler) {
            cps = threshold_ruler(jumps, scales.sigmas[i], rule);
        } else {
            std::vector<double> yrow(n);
            std::vector<std::uint8_t> mask(n);
            for (std::size_t j = 0; j < n; ++j) {
                yrow[j] = y.value(i, j);
                mask[j] = y.mask[i * n + j];
            }
            cps = threshold_mbic(yrow, mask, jumps, scales.sigmas[i]);
        }
        auto row = build_segmentation(sol.row(i), n, cps);
        attach_raw_means(row, y, i);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace gflseg
