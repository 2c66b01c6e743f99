// Acceptance suite: one line per criterion, [PASS]/[FAIL], nonzero exit on
// any failure. Heavier end-to-end checks share one synthetic citation-scale
// dataset and one set of per-seed runs.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gst/banzhaf.hpp"
#include "gst/calibration.hpp"
#include "gst/datagen.hpp"
#include "gst/gcn.hpp"
#include "gst/objective.hpp"
#include "gst/propagation.hpp"
#include "gst/selftrain.hpp"
#include "oracles.hpp"

using namespace gst;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

struct StopWatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

Matrix random_logits(std::size_t n, std::size_t c, Rng& rng, double scale) {
    Matrix m(n, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = uniform_real(rng, -scale, scale);
    return m;
}

// --- criterion 1: PPR power iteration vs dense closed form ---------------

void criterion_ppr_oracle() {
    StopWatch sw;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(seed + 10);
        const std::size_t n = 5 + uniform_u64(rng, 16);  // n <= 20
        const Graph g = make_er_graph(n, 0.3, 2, 2, seed);
        const auto adj = normalize(g, NormMode::row, true);
        const Matrix x0 = random_logits(n, 3, rng, 3.0);
        const double alpha = 0.05 + 0.4 * uniform_real(rng);
        const Matrix iterated = ppr_propagate(adj, x0, PprConfig{alpha, 1000, 1e-12});
        const Matrix direct = oracle::ppr_direct(adj, x0, alpha);
        worst = std::max(worst, max_abs_diff(iterated, direct));
    }
    const double secs = sw.s();
    report(1, "PPR power iteration matches the dense direct solve", worst <= 1e-8 && secs < 5.0,
           fmt("max |diff| %.3g over 50 graphs, %.2f s", worst, secs));
}

// --- criterion 2: compose linearity --------------------------------------

void criterion_compose_linearity() {
    double worst_joint = 0.0, worst_pair = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(seed + 5000);
        const std::size_t n = 8 + uniform_u64(rng, 13);
        const Graph g = make_er_graph(n, 0.3, 2, 2, seed + 70);
        const auto adj = normalize(g, NormMode::row, true);
        const Matrix logits = random_logits(n, 3, rng, 3.0);

        std::vector<NodeId> ids(n);
        std::iota(ids.begin(), ids.end(), 0);
        shuffle(ids, rng);
        const std::vector<NodeId> anchored(ids.begin(), ids.begin() + 2);
        const std::size_t n_cand = 2 + uniform_u64(rng, 4);
        const std::vector<NodeId> candidates(ids.begin() + 2, ids.begin() + 2 + n_cand);

        const PprConfig cfg{0.15, 50, 0.0};
        const auto st = build_state(adj, logits, anchored, candidates, cfg);

        std::vector<NodeId> subset;
        for (NodeId c : candidates)
            if (uniform_real(rng) < 0.5) subset.push_back(c);
        if (subset.empty()) subset.push_back(candidates[0]);

        Matrix masked(n, 3);
        auto anchor = [&](NodeId v) {
            for (std::size_t q = 0; q < 3; ++q)
                masked(static_cast<std::size_t>(v), q) = logits(static_cast<std::size_t>(v), q);
        };
        for (NodeId v : anchored) anchor(v);
        for (NodeId v : subset) anchor(v);
        worst_joint =
            std::max(worst_joint, max_abs_diff(st.compose(subset), ppr_propagate(adj, masked, cfg)));

        const Matrix ab = st.compose({candidates[0], candidates[1]});
        const Matrix a = st.compose({candidates[0]});
        const Matrix b = st.compose({candidates[1]});
        for (std::size_t i = 0; i < ab.size(); ++i)
            worst_pair = std::max(worst_pair, std::abs(ab.data()[i] - a.data()[i] - b.data()[i] +
                                                       st.base().data()[i]));
    }
    report(2, "compose equals joint propagation and is pairwise linear",
           worst_joint <= 1e-8 && worst_pair <= 1e-12,
           fmt("joint %.3g (<=1e-8), pairwise %.3g (<=1e-12)", worst_joint, worst_pair));
}

// --- criterion 3: MI decomposition ----------------------------------------

void criterion_mi_identity() {
    Rng rng = make_rng(333);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t ny = 2 + uniform_u64(rng, 5), nu = 2 + uniform_u64(rng, 5);
        Matrix joint(ny, nu);
        double s = 0.0;
        for (std::size_t i = 0; i < joint.size(); ++i) {
            joint.data()[i] = uniform_real(rng);
            s += joint.data()[i];
        }
        for (std::size_t i = 0; i < joint.size(); ++i) joint.data()[i] /= s;
        double s2 = 0.0;
        for (std::size_t i = 0; i < joint.size(); ++i) s2 += joint.data()[i];
        joint.data()[0] += 1.0 - s2;
        const auto [lhs, rhs] = mutual_information_decomposition_check(joint);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    report(3, "mutual-information decomposition identity", worst <= 1e-9,
           fmt("max |lhs-rhs| %.3g over 100 joints", worst));
}

// --- criterion 4: objective bounds -----------------------------------------

void criterion_objective_bounds() {
    Rng rng = make_rng(444);
    double lo = 0.0, hi_slack = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + uniform_u64(rng, 15), c = 2 + uniform_u64(rng, 6);
        Matrix m(n, c);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                m(i, j) = -std::log(std::max(uniform_real(rng), 1e-300));
                s += m(i, j);
            }
            for (std::size_t j = 0; j < c; ++j) m(i, j) /= s;
        }
        const double v = objective(m).value;
        lo = std::min(lo, v);
        hi_slack = std::max(hi_slack, v - std::log(static_cast<double>(c)));
    }
    report(4, "objective stays within [0, ln C]", lo >= -1e-9 && hi_slack <= 1e-9,
           fmt("min %.3g, max slack above ln C %.3g", lo, hi_slack));
}

// --- criterion 5: MSR vs exhaustive ranking ---------------------------------

std::vector<std::size_t> top3_of(const std::vector<double>& v) {
    std::vector<std::size_t> o(v.size());
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](auto a, auto b) { return v[a] > v[b]; });
    o.resize(3);
    return o;
}

std::vector<double> spaced_weights(Rng& rng) {
    std::vector<double> w(10);
    for (std::size_t i = 0; i < 10; ++i)
        w[i] = 0.05 + 0.1 * static_cast<double>(i) + uniform_real(rng, -0.02, 0.02);
    shuffle(w, rng);
    return w;
}

void criterion_msr_ranking() {
    // random tables = spaced random weights plus per-coalition interaction
    // noise of +-0.15; i.i.d. coalition values carry no rankable structure,
    // so no estimator could be expected to agree on them
    int agree = 0;
    for (std::uint64_t t = 0; t < 20; ++t) {
        Rng rng = make_rng(t);
        UtilityTable table = make_additive_table(spaced_weights(rng), 3);
        for (std::uint32_t mask = 1; mask < table.value.size(); ++mask)
            if (std::popcount(mask) <= 3) table.value[mask] += uniform_real(rng, -0.15, 0.15);

        const auto exact = exhaustive_banzhaf(10, table.as_fn(), 3);
        const auto msr = msr_banzhaf(10, table.as_fn(), 3, 50000, t + 31);
        std::vector<double> est;
        for (const auto& e : msr.estimates) est.push_back(e.value);
        if (top3_of(exact) == top3_of(est)) ++agree;
    }

    int agree_additive = 0;
    for (std::uint64_t t = 0; t < 20; ++t) {
        Rng rng = make_rng(t + 900);
        const auto table = make_additive_table(spaced_weights(rng), 3);
        const auto exact = exhaustive_banzhaf(10, table.as_fn(), 3);
        const auto msr = msr_banzhaf(10, table.as_fn(), 3, 50000, t + 77);
        std::vector<double> est;
        for (const auto& e : msr.estimates) est.push_back(e.value);
        if (top3_of(exact) == top3_of(est)) ++agree_additive;
    }
    report(5, "MSR reproduces the exhaustive top-3 ranking", agree >= 18 && agree_additive == 20,
           fmt("noisy tables %d/20 (>=18), additive tables %d/20 (=20)", agree, agree_additive));
}

// --- criterion 6: ranking robustness at the certificate bound ----------------

void criterion_robustness_bound() {
    int clean = 0, total = 0, unmet = 0;
    for (std::uint64_t t = 0; t < 10; ++t) {
        Rng rng = make_rng(t + 60);
        std::vector<double> w(6);
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = 1.0 + 2.0 * static_cast<double>(i) + uniform_real(rng, 0.0, 0.4);
        const auto cert = rank_robustness_probe(make_additive_table(w, 3), 1.0, 3, 100, t + 7);
        if (!cert.hypotheses_met) {
            ++unmet;
            continue;
        }
        clean += cert.n_clean;
        total += cert.n_perturbations;
    }
    report(6, "perturbations at the certificate bound never invert rankings",
           unmet == 0 && total == 1000 && clean == 1000,
           fmt("%d/%d clean perturbation draws, %d tables rejected", clean, total, unmet));
}

// --- criterion 7: influence vs random walk -----------------------------------

void criterion_influence_random_walk() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Graph g = make_er_graph(10, 0.35, 2, 2, seed + 300);
        const auto adj = normalize(g, NormMode::row, true);
        worst = std::max(worst, influence_vs_random_walk_check(adj, 2, seed));
    }
    report(7, "linear-surrogate influence equals the 2-step walk distribution", worst <= 1e-6,
           fmt("max total variation %.3g over 20 graphs", worst));
}

// --- criterion 8: gradient check ----------------------------------------------

void criterion_gradient_check() {
    const Graph g = make_er_graph(5, 0.5, 3, 2, 11);
    const auto adj = normalize(g, NormMode::symmetric, true);
    GcnModel m = init_model(3, 4, 2, 21, 0.0);
    const LabeledNodes labels = {{0, 1}, {2, 0}, {4, 1}};
    const double wd = 5e-4, eps = 1e-5;
    const auto grads = gcn_loss_grad(m, adj, g.features, labels, wd);

    double worst = 0.0;
    auto sweep_tensor = [&](double* theta, const double* analytic, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            const double keep = theta[i];
            theta[i] = keep + eps;
            const double up = gcn_loss(m, adj, g.features, labels, wd);
            theta[i] = keep - eps;
            const double dn = gcn_loss(m, adj, g.features, labels, wd);
            theta[i] = keep;
            const double fd = (up - dn) / (2 * eps);
            worst = std::max(worst, std::abs(analytic[i] - fd) /
                                        std::max({std::abs(analytic[i]), std::abs(fd), 1e-6}));
        }
    };
    sweep_tensor(m.w1.data(), grads.w1.data(), m.w1.size());
    sweep_tensor(m.b1.data(), grads.b1.data(), m.b1.size());
    sweep_tensor(m.w2.data(), grads.w2.data(), m.w2.size());
    sweep_tensor(m.b2.data(), grads.b2.data(), m.b2.size());
    report(8, "analytic gradients match finite differences on every tensor", worst <= 1e-4,
           fmt("max relative error %.3g", worst));
}

// --- criteria 9 + 10 + 12: end-to-end on the citation-scale dataset -----------

void criteria_end_to_end() {
    StopWatch sw;
    const GraphPack pack = make_synthetic_pack(SynthConfig{});

    RunConfig cfg;  // defaults: R=40, k=100, K=200, B=500, ets calibration
    cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    auto run_strategy = [&](Strategy s) {
        cfg.strategy = s;
        return run_all_seeds(pack, cfg);
    };
    const MultiRunReport raw = run_strategy(Strategy::raw);
    const MultiRunReport random_sel = run_strategy(Strategy::random_sel);
    const MultiRunReport bangs = run_strategy(Strategy::bangs);
    const MultiRunReport no_banzhaf = run_strategy(Strategy::bangs_no_banzhaf);
    const double secs = sw.s();

    const bool ok9 = raw.mean_best >= 0.78 && bangs.mean_best >= raw.mean_best + 0.01 &&
                     bangs.mean_best > random_sel.mean_best && secs < 45.0 * 60.0;
    report(9, "end-to-end ordering on the citation-scale dataset", ok9,
           fmt("raw %.4f (>=0.78) | random %.4f | coalition selection %.4f "
               "(lift %+.2f pts, vs random %+.2f pts) | %.0f s (<2700)",
               raw.mean_best, random_sel.mean_best, bangs.mean_best,
               100.0 * (bangs.mean_best - raw.mean_best),
               100.0 * (bangs.mean_best - random_sel.mean_best), secs));

    // criterion 10: calibration on each seed's raw-model validation logits
    int ts_improves = 0, ets_no_worse = 0;
    const auto adj_sym = normalize(pack.graph, NormMode::symmetric, true);
    for (std::uint64_t seed : cfg.seeds) {
        TrainConfig tc = cfg.train;
        tc.seed = hash_seed(seed, 0);
        GcnModel f0 = init_model(pack.graph.n_features(), static_cast<std::size_t>(tc.hidden_dim),
                                 static_cast<std::size_t>(pack.graph.n_classes), tc.seed,
                                 tc.dropout_rate);
        LabeledNodes tr, va;
        for (NodeId v : pack.split.train_ids)
            tr.emplace_back(v, pack.graph.labels[static_cast<std::size_t>(v)]);
        for (NodeId v : pack.split.val_ids)
            va.emplace_back(v, pack.graph.labels[static_cast<std::size_t>(v)]);
        const auto res = train(std::move(f0), adj_sym, pack.graph.features, tr, va, tc);
        const Matrix logits = forward(res.model, adj_sym, pack.graph.features);

        Matrix val_logits(va.size(), logits.cols());
        std::vector<int> val_labels(va.size());
        for (std::size_t i = 0; i < va.size(); ++i) {
            val_labels[i] = va[i].second;
            for (std::size_t q = 0; q < logits.cols(); ++q)
                val_logits(i, q) = logits(static_cast<std::size_t>(va[i].first), q);
        }
        const auto ts = fit_temperature(val_logits, val_labels);
        const auto ets = fit_ets(val_logits, val_labels);
        const double nll_1 = nll_at_temperature(val_logits, val_labels, 1.0);
        const double nll_ts = nll_at_temperature(val_logits, val_labels, ts.temperature);
        const double nll_ets = nll(apply(ets, val_logits), val_labels);
        if (nll_ts < nll_1) ++ts_improves;
        if (nll_ets <= nll_ts + 1e-12) ++ets_no_worse;
    }
    report(10, "temperature scaling and its ensemble reduce validation NLL",
           ts_improves == 10 && ets_no_worse == 10,
           fmt("TS improves %d/10 seeds, ETS <= TS %d/10 seeds", ts_improves, ets_no_worse));

    // criterion 12: removing the coalition ranking must not win by > 0.5 pts
    const double gap = 100.0 * (bangs.mean_best - no_banzhaf.mean_best);
    report(12, "coalition ranking holds up against the independent-marginal ablation", gap >= -0.5,
           fmt("full %.4f vs independent-marginal %.4f (gap %+.2f pts, fail below -0.5)",
               bangs.mean_best, no_banzhaf.mean_best, gap));
}

// --- criterion 11: determinism -------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    SynthConfig sc;
    sc.n_nodes = 400;
    sc.n_features = 120;
    sc.n_edges = 800;
    sc.n_classes = 5;
    sc.class_weights = {0.2, 0.2, 0.2, 0.2, 0.2};
    sc.train_per_class = 6;
    sc.n_val = 60;
    sc.n_test = 80;
    sc.topic_words_per_class = 20;
    sc.topic_word_prob = 0.4;
    const GraphPack pack = make_synthetic_pack(sc);

    RunConfig cfg;
    cfg.strategy = Strategy::bangs;
    cfg.rounds = 4;
    cfg.select_k = 20;
    cfg.pool_K = 40;
    cfg.banzhaf_samples = 120;
    cfg.train.max_epochs = 80;
    cfg.train.patience = 20;
    cfg.seeds = {3};
    cfg.record_timing = false;  // wall-clock noise is not part of the contract

    const auto dir = std::filesystem::temp_directory_path() / "gst_acceptance";
    std::filesystem::create_directories(dir);
    write_rounds_csv(run_single(pack, cfg, 3), dir / "run_a.csv");
    write_rounds_csv(run_single(pack, cfg, 3), dir / "run_b.csv");
    const bool csv_identical = slurp(dir / "run_a.csv") == slurp(dir / "run_b.csv");

    // multi-threaded Banzhaf sampling must select the same nodes
    cfg.n_threads = 4;
    const auto threaded = run_single(pack, cfg, 3);
    cfg.n_threads = 1;
    const auto serial = run_single(pack, cfg, 3);
    bool same_runs = threaded.rounds.size() == serial.rounds.size();
    if (same_runs)
        for (std::size_t i = 0; i < serial.rounds.size(); ++i)
            same_runs = same_runs && serial.rounds[i].test_acc == threaded.rounds[i].test_acc &&
                        serial.rounds[i].val_acc == threaded.rounds[i].val_acc;

    report(11, "single-thread reruns are byte-identical; thread count changes nothing",
           csv_identical && same_runs,
           fmt("rounds.csv identical: %s, 4-thread == 1-thread: %s", csv_identical ? "yes" : "no",
               same_runs ? "yes" : "no"));
}

}  // namespace

int main() {
    StopWatch total;
    criterion_ppr_oracle();
    criterion_compose_linearity();
    criterion_mi_identity();
    criterion_objective_bounds();
    criterion_msr_ranking();
    criterion_robustness_bound();
    criterion_influence_random_walk();
    criterion_gradient_check();
    criteria_end_to_end();
    criterion_determinism();
    std::printf("%s — %d criterion(s) failed, %.0f s total\n",
                g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT", g_failures, total.s());
    return g_failures == 0 ? 0 : 1;
}
