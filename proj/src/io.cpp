#include "gflseg/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gflseg {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
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

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

void expect_header(const std::string& got, const std::string& want, const std::string& path) {
    if (got != want) throw std::runtime_error(path + ": unexpected header");
}

}  // namespace

void write_signals(const std::string& path, const SignalMatrix& signals) {
    auto out = open_out(path);
    out << "chrom\tpos";
    for (const auto& label : signals.labels) out << '\t' << label;
    out << '\n';
    const std::size_t n = signals.n_loci();
    for (std::size_t j = 0; j < n; ++j) {
        out << signals.grid.chromosome << '\t' << signals.grid.positions[j];
        for (std::size_t i = 0; i < signals.n_seq; ++i) {
            out << '\t';
            if (signals.observed(i, j))
                out << format_double(signals.value(i, j));
            else
                out << "NA";
        }
        out << '\n';
    }
}

void write_segments(const std::string& path, const std::vector<SegmentRecord>& records) {
    auto out = open_out(path);
    out << "seq\tchrom\tstart_pos\tend_pos\tn_loci\tmean_raw\tmean_beta\n";
    for (const auto& r : records) {
        out << r.seq << '\t' << r.chrom << '\t' << r.start_pos << '\t' << r.end_pos << '\t'
            << r.n_loci << '\t' << (r.has_raw ? format_double(r.mean_raw) : std::string("NA"))
            << '\t' << format_double(r.mean_beta) << '\n';
    }
}

std::vector<SegmentRecord> read_segments(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty");
    expect_header(line, "seq\tchrom\tstart_pos\tend_pos\tn_loci\tmean_raw\tmean_beta", path);
    std::vector<SegmentRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f.size() != 7) throw std::runtime_error(path + ": bad segment row");
        SegmentRecord r;
        r.seq = f[0];
        r.chrom = f[1];
        r.start_pos = std::stoll(f[2]);
        r.end_pos = std::stoll(f[3]);
        r.n_loci = static_cast<std::size_t>(std::stoull(f[4]));
        r.has_raw = f[5] != "NA";
        r.mean_raw = r.has_raw ? std::stod(f[5]) : 0.0;
        r.mean_beta = std::stod(f[6]);
        out.push_back(std::move(r));
    }
    return out;
}

void write_calls(const std::string& path, const std::vector<CallRecord>& records) {
    auto out = open_out(path);
    out << "seq\tchrom\tstart\tend\tn_loci\tstate\tLR0\tLR1\tLR3\tLR4\tlrr_mean\tpassed_r1"
           "\tpassed_r2\n";
    for (const auto& r : records) {
        out << r.seq << '\t' << r.chrom << '\t' << r.start_pos << '\t' << r.end_pos << '\t'
            << r.n_loci << '\t' << r.state;
        for (double lr : r.lr) out << '\t' << format_double(lr);
        out << '\t' << format_double(r.lrr_mean) << '\t' << (r.passed_r1 ? 1 : 0) << '\t'
            << (r.passed_r2 ? 1 : 0) << '\n';
    }
}

std::vector<CallRecord> read_calls(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty");
    expect_header(line,
                  "seq\tchrom\tstart\tend\tn_loci\tstate\tLR0\tLR1\tLR3\tLR4\tlrr_mean"
                  "\tpassed_r1\tpassed_r2",
                  path);
    std::vector<CallRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f.size() != 13) throw std::runtime_error(path + ": bad call row");
        CallRecord r;
        r.seq = f[0];
        r.chrom = f[1];
        r.start_pos = std::stoll(f[2]);
        r.end_pos = std::stoll(f[3]);
        r.n_loci = static_cast<std::size_t>(std::stoull(f[4]));
        r.state = std::stoi(f[5]);
        for (int k = 0; k < 4; ++k) r.lr[static_cast<std::size_t>(k)] = std::stod(f[6 + k]);
        r.lrr_mean = std::stod(f[10]);
        r.passed_r1 = f[11] == "1";
        r.passed_r2 = f[12] == "1";
        out.push_back(std::move(r));
    }
    return out;
}

void write_truth(const std::string& path, const std::vector<TruthRecord>& records) {
    auto out = open_out(path);
    out << "seq\tchrom\tstart\tend\tstate\n";
    for (const auto& r : records) {
        out << r.seq << '\t' << r.chrom << '\t' << r.start_pos << '\t' << r.end_pos << '\t'
            << r.state << '\n';
    }
}

std::vector<TruthRecord> read_truth(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty");
    expect_header(line, "seq\tchrom\tstart\tend\tstate", path);
    std::vector<TruthRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f.size() != 5) throw std::runtime_error(path + ": bad truth row");
        TruthRecord r;
        r.seq = f[0];
        r.chrom = f[1];
        r.start_pos = std::stoll(f[2]);
        r.end_pos = std::stoll(f[3]);
        r.state = std::stoi(f[4]);
        out.push_back(std::move(r));
    }
    return out;
}

void write_het_mask(const std::string& path, const LocusGrid& grid,
                    const std::vector<std::uint8_t>& het) {
    if (het.size() != grid.size()) throw std::invalid_argument("het mask size mismatch");
    auto out = open_out(path);
    out << "chrom\tpos\thet\n";
    for (std::size_t j = 0; j < grid.size(); ++j)
        out << grid.chromosome << '\t' << grid.positions[j] << '\t' << (het[j] ? 1 : 0) << '\n';
}

std::vector<std::uint8_t> read_het_mask(const std::string& path, const LocusGrid& grid) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty");
    expect_header(line, "chrom\tpos\thet", path);
    std::map<long long, std::uint8_t> by_pos;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f.size() != 3) throw std::runtime_error(path + ": bad het row");
        by_pos[std::stoll(f[1])] = static_cast<std::uint8_t>(f[2] == "1");
    }
    std::vector<std::uint8_t> out(grid.size(), 0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        auto it = by_pos.find(grid.positions[j]);
        if (it == by_pos.end()) throw std::runtime_error(path + ": het mask misses a locus");
        out[j] = it->second;
    }
    return out;
}

std::map<std::string, std::string> read_config(const std::string& path) {
    auto in = open_in(path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) out[key] = value;
    }
    return out;
}

}  // namespace gflseg
