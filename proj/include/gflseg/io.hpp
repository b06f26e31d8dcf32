#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gflseg/caller.hpp"
#include "gflseg/segmenter.hpp"
#include "gflseg/sim.hpp"
#include "gflseg/types.hpp"

namespace gflseg {

// Writes the signal TSV (chrom, pos, one column per sequence; missing cells
// as "NA").
void write_signals(const std::string& path, const SignalMatrix& signals);

// Segment table row, matching the output TSV:
// seq chrom start_pos end_pos n_loci mean_raw mean_beta
struct SegmentRecord {
    std::string seq;
    std::string chrom;
    long long start_pos = 0;
    long long end_pos = 0;
    std::size_t n_loci = 0;
    double mean_raw = 0.0;
    bool has_raw = true;
    double mean_beta = 0.0;
};

void write_segments(const std::string& path, const std::vector<SegmentRecord>& records);
std::vector<SegmentRecord> read_segments(const std::string& path);

// Call table row:
// seq chrom start end n_loci state LR0 LR1 LR3 LR4 lrr_mean passed_r1 passed_r2
struct CallRecord {
    std::string seq;
    std::string chrom;
    long long start_pos = 0;
    long long end_pos = 0;
    std::size_t n_loci = 0;
    int state = 2;
    std::array<double, 4> lr{};
    double lrr_mean = 0.0;
    bool passed_r1 = false;
    bool passed_r2 = false;
};

void write_calls(const std::string& path, const std::vector<CallRecord>& records);
std::vector<CallRecord> read_calls(const std::string& path);

// Truth file: seq chrom start end state (basepair coordinates, inclusive).
struct TruthRecord {
    std::string seq;
    std::string chrom;
    long long start_pos = 0;
    long long end_pos = 0;
    int state = 2;
};

void write_truth(const std::string& path, const std::vector<TruthRecord>& records);
std::vector<TruthRecord> read_truth(const std::string& path);

// Heterozygosity mask file: chrom pos het(0/1).
void write_het_mask(const std::string& path, const LocusGrid& grid,
                    const std::vector<std::uint8_t>& het);
std::vector<std::uint8_t> read_het_mask(const std::string& path, const LocusGrid& grid);

// Flat key=value config file; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path);

// Locale-independent numeric formatting used by every writer, so outputs are
// byte-identical across runs.
std::string format_double(double v);

}  // namespace gflseg
