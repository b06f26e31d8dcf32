#include "gflseg/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gflseg {

std::string to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::kLrr: return "LRR";
        case SignalKind::kBaf: return "BAF";
        case SignalKind::kMbaf: return "mBAF";
        default: return "generic";
    }
}

SignalKind signal_kind_from_string(const std::string& text) {
    std::string t;
    for (char c : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "lrr") return SignalKind::kLrr;
    if (t == "baf") return SignalKind::kBaf;
    if (t == "mbaf") return SignalKind::kMbaf;
    if (t == "generic") return SignalKind::kGeneric;
    throw std::invalid_argument("unknown signal kind: " + text);
}

void LocusGrid::validate() const {
    if (positions.size() < 2) throw std::invalid_argument("grid needs at least 2 loci");
    for (std::size_t j = 1; j < positions.size(); ++j) {
        if (positions[j] <= positions[j - 1])
            throw std::invalid_argument("non-monotone positions");
    }
}

void SignalMatrix::validate() const {
    grid.validate();
    const std::size_t n = n_loci();
    if (n_seq < 1) throw std::invalid_argument("need at least one sequence");
    if (values.size() != n_seq * n || mask.size() != n_seq * n)
        throw std::invalid_argument("matrix shape mismatch");
    for (std::size_t i = 0; i < n_seq; ++i) {
        bool any = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (!observed(i, j)) continue;
            any = true;
            if (!std::isfinite(value(i, j)))
                throw std::invalid_argument("non-finite observed value");
        }
        if (!any) throw std::invalid_argument("sequence with no observed values");
    }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, '\t')) out.push_back(field);
    if (!line.empty() && line.back() == '\t') out.emplace_back();
    return out;
}

bool is_missing(const std::string& field) {
    return field.empty() || field == "NA" || field == "na" || field == "NaN";
}

struct RawRow {
    std::string chrom;
    long long pos;
    std::vector<std::string> cells;
};

}  // namespace

std::vector<SignalMatrix> load_signals_multi(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    auto header = split_tabs(line);
    if (header.size() < 3 || header[0] != "chrom" || header[1] != "pos")
        throw std::runtime_error("expected header 'chrom\tpos\t<seq>...' in " + path);
    const std::size_t n_seq = header.size() - 2;

    std::vector<std::string> chrom_order;
    std::map<std::string, std::vector<RawRow>> by_chrom;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_tabs(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(header.size()) + " fields, got " +
                                     std::to_string(cells.size()));
        RawRow row;
        row.chrom = cells[0];
        try {
            row.pos = std::stoll(cells[1]);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad position");
        }
        row.cells.assign(cells.begin() + 2, cells.end());
        if (!by_chrom.count(row.chrom)) chrom_order.push_back(row.chrom);
        by_chrom[row.chrom].push_back(std::move(row));
    }

    std::vector<SignalMatrix> result;
    for (const auto& chrom : chrom_order) {
        auto& rows = by_chrom[chrom];
        std::stable_sort(rows.begin(), rows.end(),
                         [](const RawRow& a, const RawRow& b) { return a.pos < b.pos; });
        for (std::size_t j = 1; j < rows.size(); ++j) {
            if (rows[j].pos == rows[j - 1].pos)
                throw std::runtime_error("non-monotone positions (duplicate " +
                                         std::to_string(rows[j].pos) + " on " + chrom + ")");
        }
        if (rows.size() < 2)
            throw std::runtime_error("fewer than 2 loci on chromosome " + chrom);

        SignalMatrix sm;
        sm.resize(n_seq, rows.size());
        sm.grid.chromosome = chrom;
        for (std::size_t i = 0; i < n_seq; ++i) sm.labels[i] = header[i + 2];
        for (std::size_t j = 0; j < rows.size(); ++j) {
            sm.grid.positions[j] = rows[j].pos;
            for (std::size_t i = 0; i < n_seq; ++i) {
                const std::string& cell = rows[j].cells[i];
                if (is_missing(cell)) {
                    sm.set(i, j, 0.0, false);
                } else {
                    try {
                        sm.set(i, j, std::stod(cell), true);
                    } catch (const std::exception&) {
                        throw std::runtime_error("bad numeric value '" + cell + "' on " + chrom +
                                                 ":" + std::to_string(rows[j].pos));
                    }
                }
            }
        }
        sm.validate();
        result.push_back(std::move(sm));
    }
    if (result.empty()) throw std::runtime_error("no data rows in " + path);
    return result;
}

SignalMatrix load_signals(const std::string& path) {
    auto all = load_signals_multi(path);
    if (all.size() != 1)
        throw std::runtime_error(path + " holds " + std::to_string(all.size()) +
                                 " chromosomes; expected one");
    return std::move(all.front());
}

void compute_mbaf(const std::vector<double>& baf, const std::vector<std::uint8_t>& mask,
                  double het_band, std::vector<double>& out,
                  std::vector<std::uint8_t>& out_mask) {
    if (het_band >= 0.5 || het_band < 0.0)
        throw std::invalid_argument("het band must lie in [0, 0.5)");
    const std::size_t n = baf.size();
    out.assign(n, 0.0);
    out_mask.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        if (!mask[j]) continue;
        const double b = baf[j];
        if (b < 0.0 || b > 1.0) throw std::invalid_argument("BAF outside [0,1]");
        if (b < het_band || b > 1.0 - het_band) continue;  // homozygous marker
        out[j] = std::max(b, 1.0 - b);
        out_mask[j] = 1;
    }
}

void mbaf_transform_row(SignalMatrix& signals, std::size_t row, double het_band) {
    const std::size_t n = signals.n_loci();
    std::vector<double> baf(n);
    std::vector<std::uint8_t> mask(n);
    for (std::size_t j = 0; j < n; ++j) {
        baf[j] = signals.value(row, j);
        mask[j] = signals.mask[row * n + j];
    }
    std::vector<double> out;
    std::vector<std::uint8_t> out_mask;
    compute_mbaf(baf, mask, het_band, out, out_mask);
    for (std::size_t j = 0; j < n; ++j) {
        signals.value(row, j) = out[j];
        signals.mask[row * n + j] = out_mask[j];
    }
    signals.kinds[row] = SignalKind::kMbaf;
}

SignalMatrix normalize(const SignalMatrix& signals, const NoiseScale& scales) {
    if (scales.sigmas.size() != signals.n_seq)
        throw std::invalid_argument("scale/matrix row mismatch");
    SignalMatrix out = signals;
    const std::size_t n = signals.n_loci();
    for (std::size_t i = 0; i < signals.n_seq; ++i) {
        const double s = scales.sigmas[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (out.mask[i * n + j]) out.values[i * n + j] /= s;
        }
    }
    return out;
}

SignalMatrix stack_union(const std::vector<SignalMatrix>& parts) {
    if (parts.empty()) throw std::invalid_argument("nothing to stack");
    const std::string& chrom = parts.front().grid.chromosome;
    std::set<long long> loci;
    std::size_t total_seq = 0;
    for (const auto& p : parts) {
        if (p.grid.chromosome != chrom)
            throw std::invalid_argument("chromosome mismatch in stack_union");
        loci.insert(p.grid.positions.begin(), p.grid.positions.end());
        total_seq += p.n_seq;
    }

    SignalMatrix out;
    out.resize(total_seq, loci.size());
    out.grid.chromosome = chrom;
    std::copy(loci.begin(), loci.end(), out.grid.positions.begin());
    std::fill(out.mask.begin(), out.mask.end(), 0);

    std::map<long long, std::size_t> index;
    for (std::size_t j = 0; j < out.grid.positions.size(); ++j)
        index[out.grid.positions[j]] = j;

    std::size_t row = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p.n_seq; ++i, ++row) {
            out.labels[row] = p.labels[i];
            out.kinds[row] = p.kinds[i];
            for (std::size_t j = 0; j < p.n_loci(); ++j) {
                if (!p.observed(i, j)) continue;
                out.set(row, index.at(p.grid.positions[j]), p.value(i, j), true);
            }
        }
    }
    return out;
}

}  // namespace gflseg
