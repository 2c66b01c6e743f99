#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gst/banzhaf.hpp"
#include "gst/calibration.hpp"
#include "gst/gcn.hpp"
#include "gst/graph.hpp"
#include "gst/propagation.hpp"

namespace gst {

enum class Strategy { bangs, bangs_uncal, bangs_no_banzhaf, conf_cal, conf_uncal, random_sel, raw };
enum class CalibrationKind { none, ts, ets };
enum class BanzhafMode { msr, exhaustive };

Strategy strategy_from_string(const std::string& s);
std::string to_string(Strategy s);
CalibrationKind calibration_from_string(const std::string& s);
std::string to_string(CalibrationKind c);

struct RunConfig {
    std::string dataset_dir;
    Strategy strategy = Strategy::bangs;
    int rounds = 40;
    std::size_t select_k = 100;
    std::size_t pool_K = 200;
    std::size_t banzhaf_samples = 500;
    CalibrationKind calibration = CalibrationKind::ets;
    PprConfig ppr;
    bool exact_ppr = false;  // continue the power iteration up to 100 steps under tol
    double delta_memory_cap_mb = 1024.0;
    TrainConfig train;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    double noise_sigma = 0.0;
    double train_fraction_beta = 1.0;
    bool early_stop = true;  // per-epoch early stopping inside each round
    SamplingScheme sampling = SamplingScheme::size_uniform;
    BanzhafMode banzhaf_mode = BanzhafMode::msr;
    bool exclude_selected_from_objective = false;
    int n_threads = 1;         // Banzhaf sampling workers
    bool record_timing = true;  // false pins wall_time_s to 0 for byte-stable CSVs

    void validate() const;
};

/// One self-training round. pseudo_acc scores the newly selected labels
/// against ground truth; it is a diagnostic and never feeds back into
/// selection. Round 0 is the raw teacher (nothing selected).
struct RoundRecord {
    int round = 0;
    std::size_t n_selected = 0;
    double pseudo_acc = std::numeric_limits<double>::quiet_NaN();
    double val_acc = 0.0;
    double test_acc = 0.0;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
    double wall_time_s = 0.0;
};

struct RunReport {
    std::uint64_t seed = 0;
    Strategy strategy = Strategy::raw;
    std::vector<RoundRecord> rounds;
    bool pool_exhausted = false;
    // Protocol A: best test accuracy across rounds.
    int best_round = 0;
    double best_test_acc = 0.0;
    // Protocol B: test accuracy at the round of peak validation accuracy.
    int early_stop_round = 0;
    double early_stop_test_acc = 0.0;
};

/// Execute the full teacher/student loop for one seed on a loaded dataset.
/// Noise injection and train subsampling are applied (seeded from the run
/// seed) before the first teacher is trained.
RunReport run_single(const GraphPack& pack, const RunConfig& config, std::uint64_t seed);

struct MultiRunReport {
    std::vector<RunReport> runs;
    double mean_best = 0.0, std_best = 0.0;
    double mean_early = 0.0, std_early = 0.0;
};

MultiRunReport run_all_seeds(const GraphPack& pack, const RunConfig& config);

/// Load the dataset named by config.dataset_dir, then run every seed.
MultiRunReport run(const RunConfig& config);

enum class SweepAxis { k, K, sigma, beta };
SweepAxis axis_from_string(const std::string& s);

struct SweepCell {
    double value = 0.0;
    MultiRunReport report;
    std::vector<std::string> errors;  // per-seed failures; the sweep continues
};

/// One multi-seed run per axis value. Axis k also adjusts the pool to
/// 2k (k < 100) or k+100, with k = 0 degenerating to the raw baseline.
std::vector<SweepCell> sweep(const GraphPack& pack, const RunConfig& config, SweepAxis axis,
                             const std::vector<double>& values);

// --- Reports ----------------------------------------------------------------

/// Exactly: round,n_selected,pseudo_acc,val_acc,test_acc,objective,wall_time_s
void write_rounds_csv(const RunReport& report, const std::filesystem::path& path);

/// Per-strategy mean/std over seeds for both protocols.
void write_summary_json(const std::vector<MultiRunReport>& reports,
                        const std::filesystem::path& path);

/// Long-format sweep table, one row per (value, seed).
void write_sweep_csv(SweepAxis axis, const std::vector<SweepCell>& cells,
                     const std::filesystem::path& path);

double mean_of(const std::vector<double>& v);
double sample_std(const std::vector<double>& v);  // n-1 denominator

// --- Config file ------------------------------------------------------------

/// JSON keys mirror the RunConfig field names (see README). Unknown keys are
/// rejected so typos fail loudly.
RunConfig load_run_config(const std::filesystem::path& json_path);
RunConfig run_config_from_json_text(const std::string& text);

}  // namespace gst
