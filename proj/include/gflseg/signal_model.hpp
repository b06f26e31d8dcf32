#pragma once

#include <string>
#include <vector>

#include "gflseg/types.hpp"

namespace gflseg {

// Reads a signal TSV: header "chrom pos <seq1> <seq2> ...", one row per
// locus, "NA" or empty cell = missing. All rows must belong to one
// chromosome; use load_signals_multi for multi-chromosome files.
// Throws std::runtime_error on malformed rows, non-monotone positions or
// fewer than 2 loci.
SignalMatrix load_signals(const std::string& path);

// Multi-chromosome variant: one SignalMatrix per chromosome, in file order.
std::vector<SignalMatrix> load_signals_multi(const std::string& path);

// Mirrored BAF: markers with BAF inside the heterozygous band [t, 1-t] map
// to max(b, 1-b); markers outside the band (homozygous) and missing markers
// become missing. het_band must be < 0.5.
void compute_mbaf(const std::vector<double>& baf, const std::vector<std::uint8_t>& mask,
                  double het_band, std::vector<double>& out,
                  std::vector<std::uint8_t>& out_mask);

// Convenience: applies compute_mbaf to row i of a matrix in place and
// relabels the row kind as mBAF.
void mbaf_transform_row(SignalMatrix& signals, std::size_t row, double het_band);

// Divides each observed value by the row's sigma. Scales must come from the
// same matrix; degenerate rows (sigma at floor) are left to the caller's
// flagging.
SignalMatrix normalize(const SignalMatrix& signals, const NoiseScale& scales);

// Stacks sequences measured at different loci onto the union grid: grid =
// sorted union of positions, each sequence keeps its own observations and is
// masked elsewhere. All inputs must share the chromosome label.
SignalMatrix stack_union(const std::vector<SignalMatrix>& parts);

}  // namespace gflseg
