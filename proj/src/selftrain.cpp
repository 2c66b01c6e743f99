#include "gst/selftrain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <stdexcept>

#include <json.hpp>

#include "gst/objective.hpp"
#include "gst/rng.hpp"

namespace gst {

using nlohmann::json;

namespace {

// stream tags for deriving independent per-purpose RNG seeds
constexpr std::uint64_t kTagNoise = 0x6e6f6973ULL;
constexpr std::uint64_t kTagBeta = 0x62657461ULL;
constexpr std::uint64_t kTagBanzhaf = 0x62616e7aULL;
constexpr std::uint64_t kTagRandomSel = 0x72616e64ULL;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

bool uses_calibration(Strategy s) {
    return s == Strategy::bangs || s == Strategy::bangs_no_banzhaf || s == Strategy::conf_cal;
}

bool is_bangs_family(Strategy s) {
    return s == Strategy::bangs || s == Strategy::bangs_uncal || s == Strategy::bangs_no_banzhaf;
}

std::vector<NodeId> anchored_nodes(const LabelState& state) {
    std::vector<NodeId> anchored = state.labeled();
    for (const auto& p : state.pseudo()) anchored.push_back(p.node);
    return anchored;
}

// top-k of `unlabeled` by per-node confidence, id ascending on ties
std::vector<NodeId> top_confident(const Matrix& probs, const std::vector<NodeId>& unlabeled,
                                  std::size_t k) {
    std::vector<NodeId> order = unlabeled;
    std::vector<double> conf(probs.rows(), 0.0);
    for (NodeId v : unlabeled) {
        const auto i = static_cast<std::size_t>(v);
        conf[i] = probs(i, argmax_row(probs.row(i), probs.cols()));
    }
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        const double ca = conf[static_cast<std::size_t>(a)], cb = conf[static_cast<std::size_t>(b)];
        if (ca != cb) return ca > cb;
        return a < b;
    });
    order.resize(std::min(k, order.size()));
    return order;
}

struct SelectionOutcome {
    std::vector<std::pair<NodeId, int>> selected;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
};

PprConfig effective_ppr(const RunConfig& cfg) {
    PprConfig p = cfg.ppr;
    if (cfg.exact_ppr) p.steps = std::max(p.steps, 100);
    return p;
}

// Utility of Eq-style subsets against one shared propagation state; the
// evaluation set optionally excludes the coalition itself.
UtilityFn make_utility_fn(const PropagationState& state, const std::vector<NodeId>& unlabeled,
                          bool exclude_selected) {
    if (!exclude_selected) {
        return [&state, &unlabeled](const std::vector<std::size_t>& subset) {
            return utility(state, subset, unlabeled);
        };
    }
    return [&state, &unlabeled](const std::vector<std::size_t>& subset) {
        std::vector<std::uint8_t> drop(state.n_nodes(), 0);
        for (std::size_t j : subset) drop[static_cast<std::size_t>(state.candidates()[j])] = 1;
        std::vector<NodeId> eval;
        eval.reserve(unlabeled.size());
        for (NodeId v : unlabeled)
            if (!drop[static_cast<std::size_t>(v)]) eval.push_back(v);
        if (eval.empty()) return 0.0;  // coalition covered the whole unlabeled set
        return utility(state, subset, eval);
    };
}

SelectionOutcome select_for_strategy(const RunConfig& cfg, Strategy strategy,
                                     const Matrix& teacher_logits,
                                     const NormalizedAdjacency& adj_row, const LabelState& state,
                                     const std::vector<int>& working_labels,
                                     const std::vector<NodeId>& val_ids, std::uint64_t run_seed,
                                     int round) {
    const auto& unlabeled = state.unlabeled();
    if (unlabeled.empty()) throw std::runtime_error("selection requested with no unlabeled nodes");
    const std::size_t k_eff = std::min(cfg.select_k, unlabeled.size());

    // calibrate on this round's validation logits when the strategy asks
    Matrix probs;
    Matrix prop_logits = teacher_logits;
    if (uses_calibration(strategy) && cfg.calibration != CalibrationKind::none) {
        Matrix val_logits(val_ids.size(), teacher_logits.cols());
        std::vector<int> val_labels(val_ids.size());
        for (std::size_t i = 0; i < val_ids.size(); ++i) {
            const auto v = static_cast<std::size_t>(val_ids[i]);
            val_labels[i] = working_labels[v];
            for (std::size_t q = 0; q < teacher_logits.cols(); ++q)
                val_logits(i, q) = teacher_logits(v, q);
        }
        double temperature = 1.0;
        if (cfg.calibration == CalibrationKind::ts) {
            const auto ts = fit_temperature(val_logits, val_labels);
            temperature = ts.temperature;
            probs = apply(ts, teacher_logits);
        } else {
            const auto ets = fit_ets(val_logits, val_labels);
            temperature = ets.temperature;
            probs = apply(ets, teacher_logits);
        }
        // propagate temperature-scaled logits; they stay logits, unlike the
        // full ETS mixture
        for (std::size_t i = 0; i < prop_logits.size(); ++i) prop_logits.data()[i] /= temperature;
    } else {
        probs = softmax_rows(teacher_logits);
    }

    SelectionOutcome out;

    if (strategy == Strategy::conf_cal || strategy == Strategy::conf_uncal) {
        const auto chosen = top_confident(probs, unlabeled, k_eff);
        for (NodeId v : chosen) {
            const auto i = static_cast<std::size_t>(v);
            out.selected.emplace_back(v, static_cast<int>(argmax_row(probs.row(i), probs.cols())));
        }
    } else if (strategy == Strategy::random_sel) {
        Rng rng = make_rng(hash_seed(run_seed, static_cast<std::uint64_t>(round), kTagRandomSel));
        const auto idx = sample_indices(rng, unlabeled.size(), k_eff);
        std::vector<NodeId> chosen;
        for (std::size_t i : idx) chosen.push_back(unlabeled[i]);
        std::sort(chosen.begin(), chosen.end());
        for (NodeId v : chosen) {
            const auto i = static_cast<std::size_t>(v);
            out.selected.emplace_back(v, static_cast<int>(argmax_row(probs.row(i), probs.cols())));
        }
    } else {
        // bangs family: candidate pool, propagation state, utility ranking
        const std::size_t pool_size =
            strategy == Strategy::bangs_no_banzhaf
                ? std::min(k_eff + 100, unlabeled.size())
                : std::min(cfg.pool_K, unlabeled.size());
        CandidatePool pool = select_candidates(probs, prop_logits, state, pool_size);
        const PropagationState prop_state =
            build_state(adj_row, prop_logits, anchored_nodes(state), pool.nodes, effective_ppr(cfg),
                        cfg.delta_memory_cap_mb);
        const UtilityFn u = make_utility_fn(prop_state, unlabeled, cfg.exclude_selected_from_objective);

        std::vector<double> values;
        if (strategy == Strategy::bangs_no_banzhaf) {
            // individual marginal utility U({i}) - U(empty)
            const double base_u = u({});
            values.resize(pool.size());
            for (std::size_t j = 0; j < pool.size(); ++j) values[j] = u({j}) - base_u;
        } else if (cfg.banzhaf_mode == BanzhafMode::exhaustive) {
            values = exhaustive_banzhaf(pool.size(), u, std::min(k_eff, pool.size()));
        } else {
            const auto msr = msr_banzhaf(pool.size(), u, k_eff, cfg.banzhaf_samples,
                                         hash_seed(run_seed, static_cast<std::uint64_t>(round), kTagBanzhaf),
                                         cfg.sampling, cfg.n_threads);
            values.reserve(msr.estimates.size());
            for (const auto& e : msr.estimates) values.push_back(e.value);
        }
        out.selected = top_k_select(values, pool, k_eff);

        std::vector<std::size_t> sel_idx;
        for (const auto& [v, y] : out.selected) sel_idx.push_back(prop_state.index_of(v));
        std::sort(sel_idx.begin(), sel_idx.end());
        out.objective_value = u(sel_idx);
        return out;
    }

    // conf/random strategies carry no propagation state of their own; score
    // the chosen set with raw-logit propagation for the round record
    std::vector<NodeId> chosen_nodes;
    for (const auto& [v, y] : out.selected) chosen_nodes.push_back(v);
    const PropagationState score_state =
        build_state(adj_row, teacher_logits, anchored_nodes(state), chosen_nodes, effective_ppr(cfg),
                    cfg.delta_memory_cap_mb);
    out.objective_value = utility_nodes(score_state, chosen_nodes, unlabeled);
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (rounds < 0) throw std::invalid_argument("rounds must be >= 0");
    if (select_k > pool_K) throw std::invalid_argument("select_k must not exceed pool_K");
    if (banzhaf_samples < 1) throw std::invalid_argument("banzhaf_samples must be >= 1");
    if (!(ppr.alpha > 0.0 && ppr.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    if (ppr.steps < 1) throw std::invalid_argument("ppr_steps must be >= 1");
    if (ppr.tol < 0.0) throw std::invalid_argument("ppr_tol must be >= 0");
    if (!(train_fraction_beta > 0.0 && train_fraction_beta <= 1.0))
        throw std::invalid_argument("train_fraction_beta must lie in (0,1]");
    if (noise_sigma < 0.0 || noise_sigma > 1.0) throw std::invalid_argument("noise_sigma must lie in [0,1]");
    if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
    if (train.learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
    if (train.patience > train.max_epochs) throw std::invalid_argument("patience must not exceed max_epochs");
    if (n_threads < 1) throw std::invalid_argument("n_threads must be >= 1");
}

RunReport run_single(const GraphPack& pack, const RunConfig& config, std::uint64_t seed) {
    config.validate();
    const Graph& g = pack.graph;

    Split split = pack.split;
    if (config.train_fraction_beta < 1.0)
        split = subsample_train(split, config.train_fraction_beta, hash_seed(seed, kTagBeta));

    std::vector<int> working_labels = g.labels;
    if (config.noise_sigma > 0.0) {
        std::vector<NodeId> pool = split.train_ids;
        pool.insert(pool.end(), split.val_ids.begin(), split.val_ids.end());
        working_labels = flip_labels(g.labels, g.n_classes, pool, config.noise_sigma,
                                     hash_seed(seed, kTagNoise));
    }

    const NormalizedAdjacency adj_sym = normalize(g, NormMode::symmetric, true);
    const NormalizedAdjacency adj_row = normalize(g, NormMode::row, true);

    LabelState state = LabelState::initial(g, split);

    LabeledNodes val_pairs;
    for (NodeId v : split.val_ids) val_pairs.emplace_back(v, working_labels[static_cast<std::size_t>(v)]);

    auto training_pairs = [&] {
        LabeledNodes pairs;
        for (NodeId v : state.labeled())
            pairs.emplace_back(v, working_labels[static_cast<std::size_t>(v)]);
        for (const auto& p : state.pseudo()) pairs.emplace_back(p.node, p.label);
        return pairs;
    };

    auto train_round = [&](int round) {
        TrainConfig tc = config.train;
        tc.seed = hash_seed(seed, static_cast<std::uint64_t>(round));
        if (!config.early_stop) tc.patience = 0;
        GcnModel fresh = init_model(g.n_features(), static_cast<std::size_t>(tc.hidden_dim),
                                    static_cast<std::size_t>(g.n_classes), tc.seed, tc.dropout_rate);
        return train(std::move(fresh), adj_sym, g.features, training_pairs(), val_pairs, tc);
    };

    RunReport report;
    report.seed = seed;
    report.strategy = config.strategy;

    Timer round_timer;
    TrainResult current = train_round(0);
    {
        RoundRecord rec;
        rec.round = 0;
        const auto preds = argmax_labels(forward(current.model, adj_sym, g.features));
        rec.val_acc = current.best_val_acc;
        rec.test_acc = accuracy(preds, g.labels, split.test_ids);
        rec.wall_time_s = config.record_timing ? round_timer.seconds() : 0.0;
        report.rounds.push_back(rec);
    }

    const bool self_train = config.strategy != Strategy::raw && config.select_k > 0;
    if (self_train) {
        for (int r = 1; r <= config.rounds; ++r) {
            if (state.unlabeled().empty()) {
                report.pool_exhausted = true;
                break;
            }
            Timer t;
            const Matrix teacher_logits = forward(current.model, adj_sym, g.features);
            SelectionOutcome sel =
                select_for_strategy(config, config.strategy, teacher_logits, adj_row, state,
                                    working_labels, split.val_ids, seed, r);

            state.assign_pseudo(sel.selected, r);

            std::size_t correct = 0;
            for (const auto& [v, y] : sel.selected)
                if (g.labels[static_cast<std::size_t>(v)] == y) ++correct;

            current = train_round(r);
            const auto preds = argmax_labels(forward(current.model, adj_sym, g.features));

            RoundRecord rec;
            rec.round = r;
            rec.n_selected = sel.selected.size();
            rec.pseudo_acc = static_cast<double>(correct) / static_cast<double>(sel.selected.size());
            rec.val_acc = current.best_val_acc;
            rec.test_acc = accuracy(preds, g.labels, split.test_ids);
            rec.objective_value = sel.objective_value;
            rec.wall_time_s = config.record_timing ? t.seconds() : 0.0;
            report.rounds.push_back(rec);
        }
        // the flag also trips when the last selection drained the pool
        report.pool_exhausted = report.pool_exhausted || state.unlabeled().empty();
    }

    for (std::size_t i = 0; i < report.rounds.size(); ++i) {
        if (report.rounds[i].test_acc > report.rounds[report.best_round].test_acc)
            report.best_round = static_cast<int>(i);
        if (report.rounds[i].val_acc > report.rounds[report.early_stop_round].val_acc)
            report.early_stop_round = static_cast<int>(i);
    }
    report.best_test_acc = report.rounds[static_cast<std::size_t>(report.best_round)].test_acc;
    report.early_stop_test_acc = report.rounds[static_cast<std::size_t>(report.early_stop_round)].test_acc;
    return report;
}

MultiRunReport run_all_seeds(const GraphPack& pack, const RunConfig& config) {
    config.validate();
    MultiRunReport multi;
    multi.runs.resize(config.seeds.size());

    // seeds are independent tasks; cap concurrency at the hardware
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), config.seeds.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < config.seeds.size(); ++i)
            multi.runs[i] = run_single(pack, config, config.seeds[i]);
    } else {
        std::vector<std::future<RunReport>> futs;
        futs.reserve(config.seeds.size());
        for (std::size_t i = 0; i < config.seeds.size(); ++i)
            futs.push_back(std::async(std::launch::deferred | std::launch::async,
                                      [&pack, &config, i] { return run_single(pack, config, config.seeds[i]); }));
        for (std::size_t i = 0; i < futs.size(); ++i) multi.runs[i] = futs[i].get();
    }

    std::vector<double> best, early;
    for (const auto& r : multi.runs) {
        best.push_back(r.best_test_acc);
        early.push_back(r.early_stop_test_acc);
    }
    multi.mean_best = mean_of(best);
    multi.std_best = sample_std(best);
    multi.mean_early = mean_of(early);
    multi.std_early = sample_std(early);
    return multi;
}

MultiRunReport run(const RunConfig& config) {
    if (config.dataset_dir.empty()) throw std::invalid_argument("config lacks a dataset directory");
    const GraphPack pack = load_graphpack(config.dataset_dir);
    return run_all_seeds(pack, config);
}

SweepAxis axis_from_string(const std::string& s) {
    if (s == "k") return SweepAxis::k;
    if (s == "K") return SweepAxis::K;
    if (s == "sigma") return SweepAxis::sigma;
    if (s == "beta") return SweepAxis::beta;
    throw std::invalid_argument("unknown sweep axis: " + s);
}

std::vector<SweepCell> sweep(const GraphPack& pack, const RunConfig& config, SweepAxis axis,
                             const std::vector<double>& values) {
    std::vector<SweepCell> cells;
    for (double v : values) {
        SweepCell cell;
        cell.value = v;
        RunConfig cfg = config;
        switch (axis) {
            case SweepAxis::k: {
                const auto k = static_cast<std::size_t>(v);
                cfg.select_k = k;
                cfg.pool_K = k == 0 ? config.pool_K : (k < 100 ? 2 * k : k + 100);
                break;
            }
            case SweepAxis::K:
                cfg.pool_K = static_cast<std::size_t>(v);
                break;
            case SweepAxis::sigma:
                cfg.noise_sigma = v;
                break;
            case SweepAxis::beta:
                cfg.train_fraction_beta = v;
                break;
        }
        cell.report.runs.reserve(cfg.seeds.size());
        std::vector<double> best, early;
        for (std::uint64_t s : cfg.seeds) {
            try {
                cell.report.runs.push_back(run_single(pack, cfg, s));
                best.push_back(cell.report.runs.back().best_test_acc);
                early.push_back(cell.report.runs.back().early_stop_test_acc);
            } catch (const std::exception& e) {
                cell.errors.push_back("seed " + std::to_string(s) + ": " + e.what());
            }
        }
        if (!best.empty()) {
            cell.report.mean_best = mean_of(best);
            cell.report.std_best = sample_std(best);
            cell.report.mean_early = mean_of(early);
            cell.report.std_early = sample_std(early);
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

// --- Reports ----------------------------------------------------------------

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void write_rounds_csv(const RunReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "round,n_selected,pseudo_acc,val_acc,test_acc,objective,wall_time_s\n";
    char buf[256];
    for (const auto& r : report.rounds) {
        std::snprintf(buf, sizeof buf, "%d,%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.round, r.n_selected,
                      r.pseudo_acc, r.val_acc, r.test_acc, r.objective_value, r.wall_time_s);
        out << buf;
    }
}

void write_summary_json(const std::vector<MultiRunReport>& reports,
                        const std::filesystem::path& path) {
    json strategies = json::object();
    for (const auto& multi : reports) {
        if (multi.runs.empty()) continue;
        json per_best = json::array(), per_early = json::array(), seeds = json::array();
        json exhausted = json::array();
        for (const auto& r : multi.runs) {
            seeds.push_back(r.seed);
            per_best.push_back(r.best_test_acc);
            per_early.push_back(r.early_stop_test_acc);
            exhausted.push_back(r.pool_exhausted);
        }
        strategies[to_string(multi.runs.front().strategy)] = {
            {"seeds", seeds},
            {"pool_exhausted", exhausted},
            {"best", {{"mean", multi.mean_best}, {"std", multi.std_best}, {"per_seed", per_best}}},
            {"early_stop",
             {{"mean", multi.mean_early}, {"std", multi.std_early}, {"per_seed", per_early}}}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << json{{"strategies", strategies}}.dump(2) << "\n";
}

void write_sweep_csv(SweepAxis axis, const std::vector<SweepCell>& cells,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "axis,value,seed,strategy,best_test_acc,early_stop_test_acc\n";
    const char* axis_name = axis == SweepAxis::k       ? "k"
                            : axis == SweepAxis::K     ? "K"
                            : axis == SweepAxis::sigma ? "sigma"
                                                       : "beta";
    char buf[256];
    for (const auto& cell : cells) {
        for (const auto& r : cell.report.runs) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%llu,%s,%.17g,%.17g\n", axis_name, cell.value,
                          static_cast<unsigned long long>(r.seed), to_string(r.strategy).c_str(),
                          r.best_test_acc, r.early_stop_test_acc);
            out << buf;
        }
    }
}

// --- Strings and config files -------------------------------------------------

Strategy strategy_from_string(const std::string& s) {
    if (s == "bangs") return Strategy::bangs;
    if (s == "bangs_uncal") return Strategy::bangs_uncal;
    if (s == "bangs_no_banzhaf") return Strategy::bangs_no_banzhaf;
    if (s == "conf_cal") return Strategy::conf_cal;
    if (s == "conf_uncal") return Strategy::conf_uncal;
    if (s == "random") return Strategy::random_sel;
    if (s == "raw") return Strategy::raw;
    throw std::invalid_argument("unknown strategy: " + s);
}

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::bangs: return "bangs";
        case Strategy::bangs_uncal: return "bangs_uncal";
        case Strategy::bangs_no_banzhaf: return "bangs_no_banzhaf";
        case Strategy::conf_cal: return "conf_cal";
        case Strategy::conf_uncal: return "conf_uncal";
        case Strategy::random_sel: return "random";
        case Strategy::raw: return "raw";
    }
    return "?";
}

CalibrationKind calibration_from_string(const std::string& s) {
    if (s == "none") return CalibrationKind::none;
    if (s == "ts") return CalibrationKind::ts;
    if (s == "ets") return CalibrationKind::ets;
    throw std::invalid_argument("unknown calibration: " + s);
}

std::string to_string(CalibrationKind c) {
    switch (c) {
        case CalibrationKind::none: return "none";
        case CalibrationKind::ts: return "ts";
        case CalibrationKind::ets: return "ets";
    }
    return "?";
}

RunConfig run_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }

    RunConfig cfg;
    const std::vector<std::string> known = {
        "dataset",       "strategy",     "rounds",       "select_k",
        "pool_K",        "pool_size_K",  "banzhaf_samples", "calibration",
        "alpha",         "ppr_steps",    "ppr_tol",      "exact_ppr",
        "delta_memory_cap_mb",           "learning_rate", "weight_decay",
        "max_epochs",    "patience",     "hidden_dim",   "dropout_rate",
        "seeds",         "noise_sigma",  "train_fraction_beta",
        "early_stop",    "sampling",     "banzhaf_mode",
        "exclude_selected_from_objective", "n_threads",  "record_timing"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("unknown config key: " + key);

    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("dataset", cfg.dataset_dir);
    if (j.contains("strategy")) cfg.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    get("rounds", cfg.rounds);
    get("select_k", cfg.select_k);
    get("pool_K", cfg.pool_K);
    get("pool_size_K", cfg.pool_K);  // accepted alias
    get("banzhaf_samples", cfg.banzhaf_samples);
    if (j.contains("calibration"))
        cfg.calibration = calibration_from_string(j.at("calibration").get<std::string>());
    get("alpha", cfg.ppr.alpha);
    get("ppr_steps", cfg.ppr.steps);
    get("ppr_tol", cfg.ppr.tol);
    get("exact_ppr", cfg.exact_ppr);
    get("delta_memory_cap_mb", cfg.delta_memory_cap_mb);
    get("learning_rate", cfg.train.learning_rate);
    get("weight_decay", cfg.train.weight_decay);
    get("max_epochs", cfg.train.max_epochs);
    get("patience", cfg.train.patience);
    get("hidden_dim", cfg.train.hidden_dim);
    get("dropout_rate", cfg.train.dropout_rate);
    get("seeds", cfg.seeds);
    get("noise_sigma", cfg.noise_sigma);
    get("train_fraction_beta", cfg.train_fraction_beta);
    get("early_stop", cfg.early_stop);
    if (j.contains("sampling")) {
        const auto s = j.at("sampling").get<std::string>();
        if (s == "size_uniform") cfg.sampling = SamplingScheme::size_uniform;
        else if (s == "binomial_truncated") cfg.sampling = SamplingScheme::binomial_truncated;
        else throw std::invalid_argument("unknown sampling scheme: " + s);
    }
    if (j.contains("banzhaf_mode")) {
        const auto s = j.at("banzhaf_mode").get<std::string>();
        if (s == "msr") cfg.banzhaf_mode = BanzhafMode::msr;
        else if (s == "exhaustive") cfg.banzhaf_mode = BanzhafMode::exhaustive;
        else throw std::invalid_argument("unknown banzhaf_mode: " + s);
    }
    get("exclude_selected_from_objective", cfg.exclude_selected_from_objective);
    get("n_threads", cfg.n_threads);
    get("record_timing", cfg.record_timing);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::invalid_argument("cannot open config file: " + json_path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return run_config_from_json_text(text);
}

}  // namespace gst
