// Batch CLI wiring the pipeline: simulate -> segment -> call -> evaluate,
// plus a tune helper. Exit codes: 0 success, 2 usage, 3 data error,
// 4 non-convergence.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gflseg/caller.hpp"
#include "gflseg/eval.hpp"
#include "gflseg/io.hpp"
#include "gflseg/segmenter.hpp"
#include "gflseg/signal_model.hpp"
#include "gflseg/sim.hpp"
#include "gflseg/solver.hpp"
#include "gflseg/tuning.hpp"
#include "gflseg/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace gflseg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConvergence = 4;

struct CommonOpts {
    std::string config_path;
    std::string output_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
};

std::map<std::string, std::string> load_config_map(const std::string& path) {
    if (path.empty()) return {};
    return read_config(path);
}

// Config-file values act as defaults; explicit CLI flags win.
template <typename T>
void config_default(const std::map<std::string, std::string>& cfg, const std::string& key,
                    const CLI::Option* opt, T& value) {
    if (opt->count() > 0) return;
    auto it = cfg.find(key);
    if (it == cfg.end()) return;
    std::istringstream ss(it->second);
    ss >> value;
    if (ss.fail()) throw std::runtime_error("bad config value for " + key);
}

fs::path out_path(const CommonOpts& common, const std::string& name) {
    fs::create_directories(common.output_dir);
    return fs::path(common.output_dir) / name;
}

void write_manifest(const fs::path& path, const json& manifest) {
    std::ofstream out(path);
    out << manifest.dump(2) << '\n';
}

json base_manifest(const std::string& command, const CommonOpts& common) {
    json m;
    m["tool"] = "gflseg";
    m["version"] = kVersion;
    m["command"] = command;
    m["seed"] = common.seed;
    m["threads"] = common.threads;
    return m;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(text);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

SignalKind default_kind(const std::string& label) {
    std::string up;
    for (char c : label) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "LRR" || up.ends_with(".LRR") || up.ends_with("_LRR")) return SignalKind::kLrr;
    if (up == "BAF" || up.ends_with(".BAF") || up.ends_with("_BAF")) return SignalKind::kBaf;
    return SignalKind::kGeneric;
}

std::size_t locate(const std::vector<long long>& positions, long long pos) {
    const auto it = std::lower_bound(positions.begin(), positions.end(), pos);
    if (it == positions.end() || *it != pos)
        throw std::runtime_error("position " + std::to_string(pos) + " not on the grid");
    return static_cast<std::size_t>(it - positions.begin());
}

// ---------------------------------------------------------------------------
// segment
// ---------------------------------------------------------------------------

struct SegmentOpts {
    std::string input;
    std::string kinds_csv;
    double c1 = 0.1, c2 = 2.0, c3 = 2.0, p = 1.0;
    double rho = -1.0;  // <0: rho(p) = 1-p
    std::string estimator = "SD";
    double lambda1 = -1.0, lambda2 = -1.0, lambda3 = -1.0;  // normalized units
    double epsilon = 1e-8;
    std::size_t max_iters = 10000;
    double tol_obj = 1e-9;
    double tol_param = 1e-6;
    std::string threshold = "ruler";
    double a = 1.0, b = 5.0, c = 0.2;
    double het_band = kDefaultHetBand;
    bool dump_beta = false;
};

struct ChromResult {
    std::string chrom;
    std::size_t n_loci = 0;
    std::size_t iterations = 0;
    bool converged = true;
    double seconds = 0.0;
    std::vector<SegmentRecord> records;
    std::vector<std::string> beta_lines;  // optional dump
};

ChromResult segment_chromosome(SignalMatrix sm, const SegmentOpts& opt, int threads) {
    ChromResult result;
    result.chrom = sm.grid.chromosome;
    result.n_loci = sm.n_loci();
    const auto start = std::chrono::steady_clock::now();

    // BAF columns are replaced by their mirrored transform before tuning.
    for (std::size_t i = 0; i < sm.n_seq; ++i) {
        if (sm.kinds[i] == SignalKind::kBaf) mbaf_transform_row(sm, i, opt.het_band);
    }
    for (std::size_t i = 0; i < sm.n_seq; ++i) {
        if (sm.observed_count(i) < 3)
            throw std::runtime_error("sequence " + sm.labels[i] + " on chromosome " +
                                     sm.grid.chromosome + " has fewer than 3 observed values");
    }

    const SigmaEstimator estimator =
        opt.estimator == "MAD" ? SigmaEstimator::kMad : SigmaEstimator::kSd;
    const NoiseScale scales = estimate_sigma(sm, estimator);
    const SignalMatrix normed = normalize(sm, scales);

    PenaltyConfig cfg;
    if (opt.lambda1 >= 0 || opt.lambda2 >= 0 || opt.lambda3 >= 0) {
        const double l1 = std::max(opt.lambda1, 0.0);
        const double l2 = std::max(opt.lambda2, 0.0);
        const double l3 = std::max(opt.lambda3, 0.0);
        if (l1 == 0.0 && l2 == 0.0 && l3 == 0.0)
            std::cerr << "warning: all penalties are zero; the fitted profile equals the"
                         " data and every locus becomes its own segment\n";
        cfg = PenaltyConfig::uniform(sm.n_seq, l1, l2, l3);
    } else {
        TuningInputs in;
        in.c1 = opt.c1;
        in.c2 = opt.c2;
        in.c3 = opt.c3;
        in.p = opt.p;
        if (opt.rho >= 0) in.rho = opt.rho;
        in.n_loci = sm.n_loci();
        in.n_seq = sm.n_seq;
        NoiseScale unit;  // lambdas on normalized data: sigma = 1
        unit.sigmas.assign(sm.n_seq, 1.0);
        unit.degenerate.assign(sm.n_seq, 0);
        unit.estimator = estimator;
        cfg = compute_lambdas(in, unit);
    }
    cfg.epsilon = opt.epsilon;
    cfg.max_iters = opt.max_iters;
    cfg.tol_obj = opt.tol_obj;
    cfg.tol_param = opt.tol_param;
    cfg.keep_unsnapped = false;

    const GflSolution sol = solve_gfl(normed, cfg, threads);
    result.iterations = sol.iterations;
    result.converged = sol.converged;

    NoiseScale unit;
    unit.sigmas.assign(sm.n_seq, 1.0);
    unit.degenerate = scales.degenerate;
    ThresholdRule rule{opt.a, opt.b, opt.c};
    const ThresholdMethod method =
        opt.threshold == "mbic" ? ThresholdMethod::kMbic : ThresholdMethod::kRuler;

    for (std::size_t i = 0; i < sm.n_seq; ++i) {
        SegmentationRow row;
        if (scales.degenerate[i]) {
            // constant input: one segment, no thresholding
            row = build_segmentation(sol.row(i), sol.n_loci, {});
        } else {
            const auto jumps = extract_jumps(sol, i);
            std::vector<std::size_t> cps;
            if (method == ThresholdMethod::kRuler) {
                cps = threshold_ruler(jumps, 1.0, rule);
            } else {
                std::vector<double> yrow(sm.n_loci());
                std::vector<std::uint8_t> mrow(sm.n_loci());
                for (std::size_t j = 0; j < sm.n_loci(); ++j) {
                    yrow[j] = normed.value(i, j);
                    mrow[j] = normed.mask[i * sm.n_loci() + j];
                }
                cps = threshold_mbic(yrow, mrow, jumps, 1.0);
            }
            row = build_segmentation(sol.row(i), sol.n_loci, cps);
        }
        attach_raw_means(row, sm, i);  // raw means in original units
        for (const auto& seg : row.segments) {
            SegmentRecord rec;
            rec.seq = sm.labels[i];
            rec.chrom = sm.grid.chromosome;
            rec.start_pos = sm.grid.positions[seg.start];
            rec.end_pos = sm.grid.positions[seg.end];
            rec.n_loci = seg.length();
            rec.has_raw = seg.has_raw;
            rec.mean_raw = seg.mean_raw;
            rec.mean_beta = seg.mean_beta * scales.sigmas[i];  // back to signal units
            result.records.push_back(rec);
        }
        if (opt.dump_beta) {
            for (std::size_t j = 0; j < sm.n_loci(); ++j) {
                std::ostringstream line;
                line << sm.labels[i] << '\t' << sm.grid.chromosome << '\t'
                     << sm.grid.positions[j] << '\t'
                     << format_double(sol.value(i, j) * scales.sigmas[i]);
                result.beta_lines.push_back(line.str());
            }
        }
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

int run_segment(const CommonOpts& common, const SegmentOpts& opt) {
    auto chromosomes = load_signals_multi(opt.input);

    // Column kinds: explicit list or name-based defaults.
    std::vector<SignalKind> kinds;
    if (!opt.kinds_csv.empty()) {
        for (const auto& token : split_csv(opt.kinds_csv))
            kinds.push_back(signal_kind_from_string(token));
        if (kinds.size() != chromosomes.front().n_seq)
            throw std::runtime_error("--kinds must list one kind per sequence column");
    } else {
        for (const auto& label : chromosomes.front().labels)
            kinds.push_back(default_kind(label));
    }
    for (auto& sm : chromosomes) sm.kinds = kinds;

    std::vector<ChromResult> results(chromosomes.size());
    const bool parallel_chroms = common.threads > 1 && chromosomes.size() > 1;
    if (parallel_chroms) {
        std::vector<std::future<ChromResult>> futures;
        for (auto& sm : chromosomes)
            futures.push_back(
                std::async(std::launch::async, segment_chromosome, std::move(sm), opt, 1));
        for (std::size_t k = 0; k < futures.size(); ++k) results[k] = futures[k].get();
    } else {
        for (std::size_t k = 0; k < chromosomes.size(); ++k)
            results[k] = segment_chromosome(std::move(chromosomes[k]), opt, common.threads);
    }

    std::vector<SegmentRecord> all;
    bool all_converged = true;
    json chrom_info = json::array();
    for (const auto& r : results) {
        all.insert(all.end(), r.records.begin(), r.records.end());
        all_converged = all_converged && r.converged;
        chrom_info.push_back({{"chrom", r.chrom},
                              {"n_loci", r.n_loci},
                              {"iterations", r.iterations},
                              {"converged", r.converged},
                              {"seconds", r.seconds}});
    }

    const auto seg_path = out_path(common, "segments.tsv");
    write_segments(seg_path.string(), all);
    if (opt.dump_beta) {
        std::ofstream dump(out_path(common, "beta.tsv"));
        dump << "seq\tchrom\tpos\tbeta\n";
        for (const auto& r : results)
            for (const auto& line : r.beta_lines) dump << line << '\n';
    }

    json manifest = base_manifest("segment", common);
    manifest["inputs"] = {opt.input};
    manifest["config"] = {{"c1", opt.c1},       {"c2", opt.c2},
                          {"c3", opt.c3},       {"p", opt.p},
                          {"rho", opt.rho},     {"estimator", opt.estimator},
                          {"lambda1", opt.lambda1}, {"lambda2", opt.lambda2},
                          {"lambda3", opt.lambda3}, {"epsilon", opt.epsilon},
                          {"threshold", opt.threshold}, {"a", opt.a},
                          {"b", opt.b},         {"c", opt.c},
                          {"het_band", opt.het_band}};
    manifest["chromosomes"] = chrom_info;
    manifest["outputs"] = {seg_path.string()};
    manifest["partial"] = !all_converged;
    write_manifest(out_path(common, "manifest.json"), manifest);

    if (!all_converged) {
        std::cerr << "warning: solver hit max_iters; output flagged partial\n";
        return kExitNoConvergence;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// call
// ---------------------------------------------------------------------------

struct CallOpts {
    std::string input;
    std::string segments;
    std::string lrr_col = "LRR";
    std::string baf_col = "BAF";
    double r1 = 10.0;
    double r2 = 1.0;
    double r2_del = -1.0;
    double pa = -1.0, pb = -1.0;
    double sigma_x = -1.0;  // <0: estimate from the 0.4-0.6 band
    std::size_t flank = 0;  // 0: whole chromosome baseline
    std::string mode = "mixture";
};

int run_call(const CommonOpts& common, const CallOpts& opt) {
    const auto chromosomes = load_signals_multi(opt.input);
    const auto segments = read_segments(opt.segments);

    std::vector<CallRecord> calls;
    std::map<int, std::size_t> state_counts;
    for (const auto& sm : chromosomes) {
        std::ptrdiff_t lrr_row = -1, baf_row = -1;
        for (std::size_t i = 0; i < sm.n_seq; ++i) {
            if (sm.labels[i] == opt.lrr_col) lrr_row = static_cast<std::ptrdiff_t>(i);
            if (sm.labels[i] == opt.baf_col) baf_row = static_cast<std::ptrdiff_t>(i);
        }
        if (lrr_row < 0 || baf_row < 0)
            throw std::runtime_error("LRR/BAF columns not found in " + opt.input);
        const std::size_t n = sm.n_loci();
        std::vector<double> lrr(n), baf(n);
        std::vector<std::uint8_t> lrr_mask(n), baf_mask(n);
        for (std::size_t j = 0; j < n; ++j) {
            lrr[j] = sm.value(static_cast<std::size_t>(lrr_row), j);
            baf[j] = sm.value(static_cast<std::size_t>(baf_row), j);
            lrr_mask[j] = sm.mask[static_cast<std::size_t>(lrr_row) * n + j];
            baf_mask[j] = sm.mask[static_cast<std::size_t>(baf_row) * n + j];
        }

        // Merge the change points of this subject's sequences into one finer
        // segmentation of the chromosome.
        std::vector<std::size_t> cps;
        for (const auto& rec : segments) {
            if (rec.chrom != sm.grid.chromosome) continue;
            if (rec.seq != opt.lrr_col && rec.seq != opt.baf_col) continue;
            const std::size_t start = locate(sm.grid.positions, rec.start_pos);
            if (start > 0) cps.push_back(start);
        }
        std::sort(cps.begin(), cps.end());
        cps.erase(std::unique(cps.begin(), cps.end()), cps.end());

        CallerConfig ccfg;
        ccfg.r1 = opt.r1;
        ccfg.r2 = opt.r2;
        if (opt.r2_del > 0) ccfg.r2_del = opt.r2_del;
        if (opt.pa >= 0 && opt.pb >= 0) {
            ccfg.p_a = opt.pa;
            ccfg.p_b = opt.pb;
        }
        ccfg.mode = opt.mode == "max" ? BafLikelihoodMode::kMax : BafLikelihoodMode::kMixture;
        ccfg.sigma_x =
            opt.sigma_x > 0 ? opt.sigma_x : estimate_sigma_x(baf, baf_mask, 0.03);

        std::vector<std::size_t> starts{0};
        starts.insert(starts.end(), cps.begin(), cps.end());
        for (std::size_t k = 0; k < starts.size(); ++k) {
            const std::size_t a = starts[k];
            const std::size_t b = (k + 1 < starts.size() ? starts[k + 1] - 1 : n - 1);
            estimate_lrr_baseline(lrr, lrr_mask, a, b, opt.flank, ccfg.mu2, ccfg.sigma2);
            std::vector<double> x_seg, y_seg;
            for (std::size_t j = a; j <= b; ++j) {
                if (baf_mask[j]) x_seg.push_back(baf[j]);
                if (lrr_mask[j]) y_seg.push_back(lrr[j]);
            }
            if (x_seg.empty() && y_seg.empty()) continue;
            const CnvCall call = call_segment(x_seg, y_seg, ccfg);
            CallRecord rec;
            rec.seq = opt.lrr_col;
            rec.chrom = sm.grid.chromosome;
            rec.start_pos = sm.grid.positions[a];
            rec.end_pos = sm.grid.positions[b];
            rec.n_loci = b - a + 1;
            rec.state = call.state;
            rec.lr = call.lr;
            rec.lrr_mean = call.lrr_mean;
            rec.passed_r1 = call.passed_r1;
            rec.passed_r2 = call.passed_r2;
            calls.push_back(rec);
            state_counts[call.state] += rec.n_loci;
        }
    }

    const auto call_path = out_path(common, "calls.tsv");
    write_calls(call_path.string(), calls);

    json manifest = base_manifest("call", common);
    manifest["inputs"] = {opt.input, opt.segments};
    manifest["config"] = {{"r1", opt.r1},
                          {"r2", opt.r2},
                          {"r2_del", opt.r2_del},
                          {"sigma_x", opt.sigma_x},
                          {"flank", opt.flank},
                          {"mode", opt.mode}};
    json counts;
    for (const auto& [state, loci] : state_counts) counts[std::to_string(state)] = loci;
    manifest["loci_per_state"] = counts;
    manifest["outputs"] = {call_path.string()};
    write_manifest(out_path(common, "call_manifest.json"), manifest);

    std::cout << "calls written to " << call_path.string() << '\n';
    for (const auto& [state, loci] : state_counts)
        std::cout << "state " << state << ": " << loci << " loci\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
    std::string design = "normal";
    std::size_t n_loci = 13000;
    std::string cnv_type = "loss1";
    std::size_t cnv_length = 10;
    long long cnv_start = -1;  // <0: centered
    std::string regions;       // contamination design: "type:start:len,..."
    double fraction = 0.0;
    double lrr_sigma = 0.2;
    double baf_sigma = 0.03;
    double baf_sigma_homo = 0.01;
    std::string chrom = "1";
};

std::vector<CnvSpec> parse_regions(const std::string& text) {
    std::vector<CnvSpec> out;
    for (const auto& token : split_csv(text)) {
        const auto p1 = token.find(':');
        const auto p2 = token.find(':', p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos)
            throw std::runtime_error("bad region spec '" + token + "' (want type:start:len)");
        CnvSpec spec;
        spec.type = cnv_type_from_string(token.substr(0, p1));
        spec.start = std::stoull(token.substr(p1 + 1, p2 - p1 - 1));
        spec.length = std::stoull(token.substr(p2 + 1));
        out.push_back(spec);
    }
    return out;
}

int run_simulate(const CommonOpts& common, const SimulateOpts& opt) {
    SimConfig cfg;
    cfg.n_loci = opt.n_loci;
    cfg.lrr_sigma = opt.lrr_sigma;
    cfg.baf_sigma = opt.baf_sigma;
    cfg.baf_sigma_homo = opt.baf_sigma_homo;
    cfg.chromosome = opt.chrom;

    SimulatedSample sample;
    if (opt.design == "normal") {
        CnvSpec spec;
        spec.type = cnv_type_from_string(opt.cnv_type);
        spec.length = opt.cnv_length;
        spec.start = opt.cnv_start >= 0
                         ? static_cast<std::size_t>(opt.cnv_start)
                         : (opt.n_loci - opt.cnv_length) / 2;
        sample = simulate_normal(cfg, {spec}, common.seed);
    } else if (opt.design == "contamination") {
        const auto regions =
            opt.regions.empty()
                ? std::vector<CnvSpec>{{opt.n_loci / 4, opt.n_loci / 8, CnvType::kLoss1}}
                : parse_regions(opt.regions);
        const auto pair = simulate_tumor_normal(cfg, regions, common.seed);
        sample = pair.tumor;
        sample.signals = mix_contamination(pair.tumor.signals, pair.normal.signals,
                                           opt.fraction);
        write_signals(out_path(common, "signals_tumor.tsv").string(), pair.tumor.signals);
        write_signals(out_path(common, "signals_normal.tsv").string(), pair.normal.signals);
    } else {
        throw std::runtime_error("unknown design '" + opt.design + "'");
    }

    const auto signals_path = out_path(common, "signals.tsv");
    write_signals(signals_path.string(), sample.signals);

    std::vector<TruthRecord> truth;
    for (const auto& region : sample.regions) {
        TruthRecord rec;
        rec.seq = "LRR";
        rec.chrom = opt.chrom;
        rec.start_pos = sample.signals.grid.positions[region.start];
        rec.end_pos = sample.signals.grid.positions[region.end];
        rec.state = region.state;
        truth.push_back(rec);
    }
    const auto truth_path = out_path(common, "truth.tsv");
    write_truth(truth_path.string(), truth);
    const auto het_path = out_path(common, "het.tsv");
    write_het_mask(het_path.string(), sample.signals.grid, sample.het_mask);

    json manifest = base_manifest("simulate", common);
    manifest["config"] = {{"design", opt.design},     {"n_loci", opt.n_loci},
                          {"cnv_type", opt.cnv_type}, {"cnv_length", opt.cnv_length},
                          {"fraction", opt.fraction}, {"lrr_sigma", opt.lrr_sigma},
                          {"baf_sigma", opt.baf_sigma}, {"regions", opt.regions}};
    manifest["outputs"] = {signals_path.string(), truth_path.string(), het_path.string()};
    write_manifest(out_path(common, "sim_manifest.json"), manifest);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOpts {
    std::string input;
    std::string truth;
    std::string calls;      // one path, or comma list for a sweep
    std::string het;        // optional
    std::string fractions;  // comma list matching the calls list
    std::string report = "report.json";
    std::string sweep_csv = "sensitivity.csv";
};

std::vector<int> states_from_calls(const std::vector<CallRecord>& calls,
                                   const LocusGrid& grid) {
    std::vector<int> states(grid.size(), 2);
    for (const auto& rec : calls) {
        if (rec.chrom != grid.chromosome || rec.state == 2) continue;
        const auto lo =
            std::lower_bound(grid.positions.begin(), grid.positions.end(), rec.start_pos);
        const auto hi =
            std::upper_bound(grid.positions.begin(), grid.positions.end(), rec.end_pos);
        for (auto it = lo; it != hi; ++it)
            states[static_cast<std::size_t>(it - grid.positions.begin())] = rec.state;
    }
    return states;
}

int run_evaluate(const CommonOpts& common, const EvaluateOpts& opt) {
    const auto sm = load_signals(opt.input);
    const auto truth_records = read_truth(opt.truth);

    std::vector<int> truth_states(sm.n_loci(), 2);
    std::vector<TruthRegion> regions;
    for (const auto& rec : truth_records) {
        if (rec.chrom != sm.grid.chromosome) continue;
        TruthRegion region;
        region.start = locate(sm.grid.positions, rec.start_pos);
        region.end = locate(sm.grid.positions, rec.end_pos);
        region.state = rec.state;
        regions.push_back(region);
        for (std::size_t j = region.start; j <= region.end; ++j)
            truth_states[j] = rec.state;
    }

    std::vector<std::uint8_t> het;
    if (!opt.het.empty()) het = read_het_mask(opt.het, sm.grid);

    const auto call_paths = split_csv(opt.calls);
    std::vector<double> fractions;
    if (!opt.fractions.empty()) {
        for (const auto& token : split_csv(opt.fractions)) fractions.push_back(std::stod(token));
        if (fractions.size() != call_paths.size())
            throw std::runtime_error("--fractions must match the number of call tables");
    }

    json all = json::array();
    std::ofstream sweep;
    if (call_paths.size() > 1 || !fractions.empty()) {
        sweep.open(out_path(common, opt.sweep_csv));
        sweep << "fraction,sensitivity,specificity";
        for (std::size_t r = 0; r < regions.size(); ++r) sweep << ",region" << (r + 1);
        sweep << '\n';
    }

    for (std::size_t k = 0; k < call_paths.size(); ++k) {
        const auto calls = read_calls(call_paths[k]);
        const auto called = states_from_calls(calls, sm.grid);
        const auto snp = evaluate_per_snp(truth_states, called);
        json entry;
        entry["calls"] = call_paths[k];
        entry["tpr"] = snp.tpr;
        entry["fdr"] = snp.fdr;
        entry["n_cnv_snps"] = snp.n_cnv_snps;
        entry["n_cnv_called"] = snp.n_cnv_called;
        entry["n_called_snps"] = snp.n_called_snps;
        entry["n_false_calls"] = snp.n_false_calls;
        if (!het.empty()) {
            const auto hr = evaluate_het(truth_states, regions, called, het);
            entry["sensitivity"] = hr.sensitivity;
            entry["specificity"] = hr.specificity;
            entry["n_het_in_regions"] = hr.n_het_in_regions;
            entry["n_het_outside"] = hr.n_het_outside;
            entry["region_sensitivity"] = hr.region_sensitivity;
            if (sweep.is_open()) {
                sweep << (fractions.empty() ? static_cast<double>(k) : fractions[k]) << ','
                      << format_double(hr.sensitivity) << ',' << format_double(hr.specificity);
                for (double v : hr.region_sensitivity) sweep << ',' << format_double(v);
                sweep << '\n';
            }
        }
        all.push_back(entry);
    }

    json report = base_manifest("evaluate", common);
    report["inputs"] = {opt.input, opt.truth, opt.calls};
    report["results"] = all;
    write_manifest(out_path(common, opt.report), report);
    std::cout << "report written to " << out_path(common, opt.report).string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// tune
// ---------------------------------------------------------------------------

struct TuneOpts {
    std::string input;
    std::string kinds_csv;
    double c1 = 0.1, c2 = 2.0, c3 = 2.0, p = 1.0;
    double rho = -1.0;
    std::string estimator = "SD";
    double het_band = kDefaultHetBand;
    std::size_t segment_length = 10;
    std::size_t sharers = 1;
};

int run_tune(const CommonOpts&, const TuneOpts& opt) {
    auto chromosomes = load_signals_multi(opt.input);
    std::vector<SignalKind> kinds;
    if (!opt.kinds_csv.empty()) {
        for (const auto& token : split_csv(opt.kinds_csv))
            kinds.push_back(signal_kind_from_string(token));
    } else {
        for (const auto& label : chromosomes.front().labels)
            kinds.push_back(default_kind(label));
    }

    for (auto& sm : chromosomes) {
        sm.kinds = kinds;
        for (std::size_t i = 0; i < sm.n_seq; ++i)
            if (sm.kinds[i] == SignalKind::kBaf) mbaf_transform_row(sm, i, opt.het_band);
        const SigmaEstimator estimator =
            opt.estimator == "MAD" ? SigmaEstimator::kMad : SigmaEstimator::kSd;
        const auto scales = estimate_sigma(sm, estimator);
        TuningInputs in;
        in.c1 = opt.c1;
        in.c2 = opt.c2;
        in.c3 = opt.c3;
        in.p = opt.p;
        if (opt.rho >= 0) in.rho = opt.rho;
        in.n_loci = sm.n_loci();
        in.n_seq = sm.n_seq;
        const auto cfg = compute_lambdas(in, scales);
        std::cout << "chromosome " << sm.grid.chromosome << " (N=" << sm.n_loci()
                  << ", M=" << sm.n_seq << ", rho=" << in.rho_value() << ")\n";
        std::cout << "seq\tsigma\tlambda1\tlambda2\tlambda3\tbias1\tbias2\tbias3\n";
        for (std::size_t i = 0; i < sm.n_seq; ++i) {
            const auto bias = predict_bias(cfg.lambda1[i], cfg.lambda2[i], cfg.lambda3[i],
                                           opt.segment_length, opt.sharers);
            std::cout << sm.labels[i] << '\t' << format_double(scales.sigmas[i]) << '\t'
                      << format_double(cfg.lambda1[i]) << '\t' << format_double(cfg.lambda2[i])
                      << '\t' << format_double(cfg.lambda3[i]) << '\t'
                      << format_double(bias.bias1) << '\t' << format_double(bias.bias2) << '\t'
                      << format_double(bias.bias3) << '\n';
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint multi-sequence segmentation and copy-number calling"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOpts common;
    SegmentOpts seg;
    CallOpts call;
    SimulateOpts sim;
    EvaluateOpts eval;
    TuneOpts tune;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "key=value config file");
        sub->add_option("--output-dir", common.output_dir, "output directory");
        sub->add_option("--seed", common.seed, "PRNG seed");
        sub->add_option("--threads", common.threads, "worker threads");
    };

    CLI::App* s_seg = app.add_subcommand("segment", "segment signals jointly");
    add_common(s_seg);
    s_seg->add_option("--input", seg.input, "signal TSV")->required();
    s_seg->add_option("--kinds", seg.kinds_csv, "per-column kinds (LRR,BAF,mBAF,generic)");
    auto* o_c1 = s_seg->add_option("--c1", seg.c1, "lambda1 multiplier");
    auto* o_c2 = s_seg->add_option("--c2", seg.c2, "lambda2 multiplier");
    auto* o_c3 = s_seg->add_option("--c3", seg.c3, "lambda3 multiplier");
    auto* o_p = s_seg->add_option("--p", seg.p, "anticipated carrier proportion");
    auto* o_rho = s_seg->add_option("--rho", seg.rho, "override rho(p)");
    auto* o_est = s_seg->add_option("--estimator", seg.estimator, "SD or MAD");
    s_seg->add_option("--lambda1", seg.lambda1, "direct lambda1 (normalized units)");
    s_seg->add_option("--lambda2", seg.lambda2, "direct lambda2 (normalized units)");
    s_seg->add_option("--lambda3", seg.lambda3, "direct lambda3 (normalized units)");
    auto* o_eps = s_seg->add_option("--epsilon", seg.epsilon, "smoothing constant");
    auto* o_mi = s_seg->add_option("--max-iters", seg.max_iters, "MM iteration cap");
    s_seg->add_option("--tol-obj", seg.tol_obj, "objective tolerance");
    s_seg->add_option("--tol-param", seg.tol_param, "parameter tolerance");
    auto* o_thr = s_seg->add_option("--threshold", seg.threshold, "ruler or mbic");
    auto* o_a = s_seg->add_option("--a", seg.a, "ruler a");
    auto* o_b = s_seg->add_option("--b", seg.b, "ruler b");
    auto* o_c = s_seg->add_option("--c", seg.c, "ruler c");
    auto* o_band = s_seg->add_option("--het-band", seg.het_band, "mBAF het band");
    s_seg->add_flag("--dump-beta", seg.dump_beta, "write the fitted profile");

    CLI::App* s_call = app.add_subcommand("call", "assign copy-number states to segments");
    add_common(s_call);
    s_call->add_option("--input", call.input, "signal TSV (LRR + BAF)")->required();
    s_call->add_option("--segments", call.segments, "segment table")->required();
    s_call->add_option("--lrr-col", call.lrr_col, "LRR column name");
    s_call->add_option("--baf-col", call.baf_col, "BAF column name");
    auto* o_r1 = s_call->add_option("--r1", call.r1, "LR cutoff");
    auto* o_r2 = s_call->add_option("--r2", call.r2, "LRR-mean multiplier");
    auto* o_r2d = s_call->add_option("--r2-del", call.r2_del, "deletion-specific r2");
    s_call->add_option("--pa", call.pa, "population A-allele frequency");
    s_call->add_option("--pb", call.pb, "population B-allele frequency");
    auto* o_sx = s_call->add_option("--sigma-x", call.sigma_x, "BAF noise scale");
    auto* o_flank = s_call->add_option("--flank", call.flank, "baseline flank (0=chromosome)");
    auto* o_mode = s_call->add_option("--mode", call.mode, "mixture or max");

    CLI::App* s_sim = app.add_subcommand("simulate", "generate synthetic datasets");
    add_common(s_sim);
    s_sim->add_option("--design", sim.design, "normal or contamination");
    s_sim->add_option("--n-loci", sim.n_loci, "grid size");
    s_sim->add_option("--cnv-type", sim.cnv_type, "loss1|loss2|gain1|gain2|cnloh");
    s_sim->add_option("--cnv-length", sim.cnv_length, "CNV length in loci");
    s_sim->add_option("--cnv-start", sim.cnv_start, "CNV start index (default centered)");
    s_sim->add_option("--regions", sim.regions, "contamination regions type:start:len,...");
    s_sim->add_option("--fraction", sim.fraction, "normal-cell fraction");
    s_sim->add_option("--lrr-sigma", sim.lrr_sigma, "LRR noise SD");
    s_sim->add_option("--baf-sigma", sim.baf_sigma, "BAF noise SD");
    s_sim->add_option("--baf-sigma-homo", sim.baf_sigma_homo, "homozygous-cluster BAF SD");
    s_sim->add_option("--chrom", sim.chrom, "chromosome label");

    CLI::App* s_eval = app.add_subcommand("evaluate", "score calls against truth");
    add_common(s_eval);
    s_eval->add_option("--input", eval.input, "signal TSV defining the grid")->required();
    s_eval->add_option("--truth", eval.truth, "truth table")->required();
    s_eval->add_option("--calls", eval.calls, "call table(s), comma separated")->required();
    s_eval->add_option("--het", eval.het, "heterozygosity mask");
    s_eval->add_option("--fractions", eval.fractions, "sweep fractions, comma separated");
    s_eval->add_option("--report", eval.report, "report filename");
    s_eval->add_option("--sweep-csv", eval.sweep_csv, "sweep CSV filename");

    CLI::App* s_tune = app.add_subcommand("tune", "print penalty values and biases");
    add_common(s_tune);
    s_tune->add_option("--input", tune.input, "signal TSV")->required();
    s_tune->add_option("--kinds", tune.kinds_csv, "per-column kinds");
    s_tune->add_option("--c1", tune.c1, "lambda1 multiplier");
    s_tune->add_option("--c2", tune.c2, "lambda2 multiplier");
    s_tune->add_option("--c3", tune.c3, "lambda3 multiplier");
    s_tune->add_option("--p", tune.p, "carrier proportion");
    s_tune->add_option("--rho", tune.rho, "override rho(p)");
    s_tune->add_option("--estimator", tune.estimator, "SD or MAD");
    s_tune->add_option("--het-band", tune.het_band, "mBAF het band");
    s_tune->add_option("--segment-length", tune.segment_length, "bias helper: L");
    s_tune->add_option("--sharers", tune.sharers, "bias helper: m");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const auto cfg = load_config_map(common.config_path);
        if (s_seg->parsed()) {
            config_default(cfg, "c1", o_c1, seg.c1);
            config_default(cfg, "c2", o_c2, seg.c2);
            config_default(cfg, "c3", o_c3, seg.c3);
            config_default(cfg, "p", o_p, seg.p);
            config_default(cfg, "rho", o_rho, seg.rho);
            config_default(cfg, "estimator", o_est, seg.estimator);
            config_default(cfg, "epsilon", o_eps, seg.epsilon);
            config_default(cfg, "max_iters", o_mi, seg.max_iters);
            config_default(cfg, "threshold", o_thr, seg.threshold);
            config_default(cfg, "a", o_a, seg.a);
            config_default(cfg, "b", o_b, seg.b);
            config_default(cfg, "c", o_c, seg.c);
            config_default(cfg, "het_band", o_band, seg.het_band);
            return run_segment(common, seg);
        }
        if (s_call->parsed()) {
            config_default(cfg, "r1", o_r1, call.r1);
            config_default(cfg, "r2", o_r2, call.r2);
            config_default(cfg, "r2_del", o_r2d, call.r2_del);
            config_default(cfg, "sigma_x", o_sx, call.sigma_x);
            config_default(cfg, "flank", o_flank, call.flank);
            config_default(cfg, "mode", o_mode, call.mode);
            return run_call(common, call);
        }
        if (s_sim->parsed()) return run_simulate(common, sim);
        if (s_eval->parsed()) return run_evaluate(common, eval);
        if (s_tune->parsed()) return run_tune(common, tune);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
