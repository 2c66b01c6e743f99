#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gst/datagen.hpp"
#include "gst/objective.hpp"
#include "gst/selftrain.hpp"

using namespace gst;

namespace {

// small but non-trivial pack so unit runs stay fast
const GraphPack& small_pack() {
    static const GraphPack pack = [] {
        SynthConfig sc;
        sc.n_nodes = 260;
        sc.n_features = 80;
        sc.n_edges = 520;
        sc.n_classes = 4;
        sc.class_weights = {0.3, 0.3, 0.2, 0.2};
        sc.topic_words_per_class = 16;
        sc.train_per_class = 5;
        sc.n_val = 40;
        sc.n_test = 60;
        sc.topic_word_prob = 0.5;
        return make_synthetic_pack(sc);
    }();
    return pack;
}

RunConfig small_config(Strategy s) {
    RunConfig cfg;
    cfg.strategy = s;
    cfg.rounds = 4;
    cfg.select_k = 10;
    cfg.pool_K = 20;
    cfg.banzhaf_samples = 60;
    cfg.train.max_epochs = 60;
    cfg.train.patience = 15;
    cfg.train.hidden_dim = 16;
    cfg.seeds = {1};
    cfg.record_timing = false;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("raw strategy trains once and records a single round") {
    const auto rep = run_single(small_pack(), small_config(Strategy::raw), 3);
    CHECK(rep.rounds.size() == 1);
    CHECK(rep.rounds[0].round == 0);
    CHECK(rep.rounds[0].n_selected == 0);
    CHECK(rep.best_round == 0);
    CHECK(rep.best_test_acc == rep.rounds[0].test_acc);
    CHECK(std::isnan(rep.rounds[0].objective_value));
}

TEST_CASE("select_k = 0 degenerates to the raw baseline") {
    RunConfig cfg = small_config(Strategy::bangs);
    cfg.select_k = 0;
    const auto rep = run_single(small_pack(), cfg, 3);
    CHECK(rep.rounds.size() == 1);
}

TEST_CASE("random with k >= unlabeled pool pseudo-labels everything in round 1") {
    RunConfig cfg = small_config(Strategy::random_sel);
    cfg.select_k = 10000;
    cfg.pool_K = 10000;
    cfg.rounds = 3;
    const auto rep = run_single(small_pack(), cfg, 5);
    const std::size_t eligible = 260 - 40 - 60;  // nodes outside val/test minus...
    // train ids stay labeled; everything else is pseudo-labeled at once
    CHECK(rep.rounds.size() == 2);
    CHECK(rep.rounds[1].n_selected == eligible - 20);
    CHECK(rep.pool_exhausted);
}

TEST_CASE("pseudo sets grow monotonically and never touch val or test") {
    const GraphPack& pack = small_pack();
    for (Strategy s : {Strategy::bangs, Strategy::conf_cal, Strategy::random_sel}) {
        const auto rep = run_single(pack, small_config(s), 7);
        REQUIRE(rep.rounds.size() >= 2);
        std::size_t total = 0;
        for (const auto& r : rep.rounds)
            if (r.round > 0) {
                CHECK(r.n_selected > 0);
                total += r.n_selected;
            }
        CHECK(total <= 260 - 40 - 60 - 20);
    }
}

TEST_CASE("replaying a seed reproduces every round record exactly") {
    const auto a = run_single(small_pack(), small_config(Strategy::bangs), 11);
    const auto b = run_single(small_pack(), small_config(Strategy::bangs), 11);
    REQUIRE(a.rounds.size() == b.rounds.size());
    auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    for (std::size_t i = 0; i < a.rounds.size(); ++i) {
        CHECK(a.rounds[i].test_acc == b.rounds[i].test_acc);
        CHECK(a.rounds[i].val_acc == b.rounds[i].val_acc);
        CHECK(same(a.rounds[i].objective_value, b.rounds[i].objective_value));
        CHECK(same(a.rounds[i].pseudo_acc, b.rounds[i].pseudo_acc));
        CHECK(a.rounds[i].n_selected == b.rounds[i].n_selected);
    }
    CHECK(a.best_round == b.best_round);
    CHECK(a.early_stop_round == b.early_stop_round);
}

TEST_CASE("different strategies share the same round-0 teacher per seed") {
    const auto a = run_single(small_pack(), small_config(Strategy::conf_uncal), 13);
    const auto b = run_single(small_pack(), small_config(Strategy::random_sel), 13);
    CHECK(a.rounds[0].test_acc == b.rounds[0].test_acc);
    CHECK(a.rounds[0].val_acc == b.rounds[0].val_acc);
}

TEST_CASE("bangs_no_banzhaf picks the argmax of the singleton marginal on a 2-candidate pool") {
    // mirror of the hand table: U({a})-U(0) = 1 < U({b})-U(0) = 2
    CandidatePool pool;
    pool.nodes = {4, 9};
    pool.pseudo_labels = {1, 0};
    pool.confidences = {0.9, 0.8};
    pool.teacher_logit_rows = Matrix(2, 2);
    const std::vector<double> marginals = {1.0, 2.0};
    const auto sel = top_k_select(marginals, pool, 1);
    CHECK(sel[0].first == 9);
}

TEST_CASE("exhaustive banzhaf_mode runs on tiny pools inside the loop") {
    RunConfig cfg = small_config(Strategy::bangs);
    cfg.pool_K = 12;
    cfg.select_k = 4;
    cfg.rounds = 2;
    cfg.banzhaf_mode = BanzhafMode::exhaustive;
    const auto rep = run_single(small_pack(), cfg, 19);
    CHECK(rep.rounds.size() == 3);
}

TEST_CASE("noise_sigma=0 run equals the noisy-path run with zero flips bitwise") {
    RunConfig cfg = small_config(Strategy::conf_uncal);
    const auto a = run_single(small_pack(), cfg, 23);
    cfg.noise_sigma = 0.0;
    const auto b = run_single(small_pack(), cfg, 23);
    REQUIRE(a.rounds.size() == b.rounds.size());
    for (std::size_t i = 0; i < a.rounds.size(); ++i)
        CHECK(a.rounds[i].test_acc == b.rounds[i].test_acc);
}

TEST_CASE("noise injection flips only train/val labels and lowers round-0 val accuracy") {
    RunConfig clean = small_config(Strategy::raw);
    RunConfig noisy = small_config(Strategy::raw);
    noisy.noise_sigma = 0.4;
    const auto a = run_single(small_pack(), clean, 29);
    const auto b = run_single(small_pack(), noisy, 29);
    // both runs score the test set against the untouched ground truth
    CHECK(b.rounds[0].val_acc < a.rounds[0].val_acc);
}

TEST_CASE("beta subsampling shrinks the labeled set and keeps the pipeline alive") {
    RunConfig cfg = small_config(Strategy::conf_uncal);
    cfg.train_fraction_beta = 0.5;
    cfg.rounds = 1;
    const auto rep = run_single(small_pack(), cfg, 31);
    CHECK(rep.rounds.size() == 2);
}

TEST_CASE("sweep: sigma=0 cell equals the base run bitwise; beta=1 likewise") {
    RunConfig cfg = small_config(Strategy::conf_uncal);
    cfg.rounds = 2;
    const auto base = run_single(small_pack(), cfg, 1);

    const auto sigma_cells = sweep(small_pack(), cfg, SweepAxis::sigma, {0.0});
    REQUIRE(sigma_cells.size() == 1);
    REQUIRE(sigma_cells[0].errors.empty());
    CHECK(sigma_cells[0].report.runs[0].best_test_acc == base.best_test_acc);
    CHECK(sigma_cells[0].report.runs[0].rounds.back().test_acc == base.rounds.back().test_acc);

    const auto beta_cells = sweep(small_pack(), cfg, SweepAxis::beta, {1.0});
    REQUIRE(beta_cells.size() == 1);
    CHECK(beta_cells[0].report.runs[0].best_test_acc == base.best_test_acc);
}

TEST_CASE("sweep: k=0 produces the raw baseline row") {
    RunConfig cfg = small_config(Strategy::bangs);
    const auto cells = sweep(small_pack(), cfg, SweepAxis::k, {0.0});
    REQUIRE(cells.size() == 1);
    REQUIRE(cells[0].errors.empty());
    CHECK(cells[0].report.runs[0].rounds.size() == 1);

    RunConfig raw_cfg = cfg;
    raw_cfg.strategy = Strategy::raw;
    const auto raw_rep = run_single(small_pack(), raw_cfg, cfg.seeds[0]);
    CHECK(cells[0].report.runs[0].best_test_acc == raw_rep.best_test_acc);
}

TEST_CASE("rounds CSV carries the exact schema and is byte-stable across reruns") {
    const auto dir = std::filesystem::temp_directory_path() / "gst_rounds";
    std::filesystem::create_directories(dir);
    RunConfig cfg = small_config(Strategy::bangs);
    cfg.record_timing = false;

    const auto a = run_single(small_pack(), cfg, 2);
    write_rounds_csv(a, dir / "a.csv");
    const auto b = run_single(small_pack(), cfg, 2);
    write_rounds_csv(b, dir / "b.csv");

    const std::string text_a = slurp(dir / "a.csv");
    CHECK(text_a ==slurp(dir / "b.csv"));
    CHECK(text_a.rfind("round,n_selected,pseudo_acc,val_acc,test_acc,objective,wall_time_s\n", 0) == 0);
}

TEST_CASE("summary JSON reports n-1 standard deviations") {
    CHECK(sample_std({1.0, 2.0, 3.0}) == doctest::Approx(1.0));
    CHECK(sample_std({5.0}) == 0.0);
    CHECK(mean_of({1.0, 2.0, 3.0}) == doctest::Approx(2.0));
}

TEST_CASE("empty sweep writes a header-only CSV") {
    const auto dir = std::filesystem::temp_directory_path() / "gst_sweep";
    std::filesystem::create_directories(dir);
    write_sweep_csv(SweepAxis::k, {}, dir / "empty.csv");
    CHECK(slurp(dir / "empty.csv") == "axis,value,seed,strategy,best_test_acc,early_stop_test_acc\n");
}

TEST_CASE("config JSON honors spec keys and rejects unknown ones") {
    const auto cfg = run_config_from_json_text(R"({
        "strategy": "bangs_no_banzhaf", "rounds": 7, "select_k": 5, "pool_K": 12,
        "calibration": "ts", "alpha": 0.2, "ppr_steps": 17, "exact_ppr": true,
        "seeds": [4, 5], "sampling": "binomial_truncated", "banzhaf_mode": "exhaustive",
        "learning_rate": 0.02, "noise_sigma": 0.1
    })");
    CHECK(cfg.strategy == Strategy::bangs_no_banzhaf);
    CHECK(cfg.rounds == 7);
    CHECK(cfg.ppr.alpha == 0.2);
    CHECK(cfg.ppr.steps == 17);
    CHECK(cfg.exact_ppr);
    CHECK(cfg.calibration == CalibrationKind::ts);
    CHECK(cfg.sampling == SamplingScheme::binomial_truncated);
    CHECK(cfg.banzhaf_mode == BanzhafMode::exhaustive);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 5});

    CHECK_THROWS_AS(run_config_from_json_text(R"({"selectk": 5})"), std::invalid_argument);
    CHECK_THROWS_AS(run_config_from_json_text(R"({"select_k": 50, "pool_K": 10})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_config_from_json_text(R"({"strategy": "greedy"})"), std::invalid_argument);
}

TEST_CASE("select_candidates takes the confident prefix with id tie-break") {
    const Graph g = make_er_graph(8, 0.4, 2, 2, 3);
    Split s;
    s.train_ids = {0};
    s.val_ids = {1};
    s.test_ids = {2};
    const LabelState st = LabelState::initial(g, s);

    Matrix probs(8, 2, 0.5);
    auto set_conf = [&](NodeId v, double c) {
        probs(static_cast<std::size_t>(v), 0) = c;
        probs(static_cast<std::size_t>(v), 1) = 1.0 - c;
    };
    set_conf(3, 0.9);
    set_conf(4, 0.9);
    set_conf(5, 0.8);
    set_conf(6, 0.95);
    set_conf(7, 0.6);

    Matrix logits(8, 2);
    const auto pool = select_candidates(probs, logits, st, 3);
    REQUIRE(pool.size() == 3);
    CHECK(pool.nodes[0] == 6);
    CHECK(pool.nodes[1] == 3);  // 0.9 tie broken by smaller id
    CHECK(pool.nodes[2] == 4);
    CHECK(pool.pseudo_labels[0] == 0);

    // K larger than the pool: everything unlabeled is returned
    const auto all = select_candidates(probs, logits, st, 100);
    CHECK(all.size() == 5);
}

TEST_CASE("citation-scale pack matches the expected dimensions") {
    const GraphPack pack = make_synthetic_pack(SynthConfig{});
    CHECK(pack.graph.n_nodes == 2708);
    CHECK(pack.graph.n_features() == 1433);
    CHECK(pack.graph.n_classes == 7);
    CHECK(pack.split.train_ids.size() == 140);
    CHECK(pack.split.val_ids.size() == 500);
    CHECK(pack.split.test_ids.size() == 1000);
}

TEST_CASE("run defaults follow the standard recipe") {
    const RunConfig cfg;
    CHECK(cfg.rounds == 40);
    CHECK(cfg.select_k == 100);
    CHECK(cfg.pool_K == 200);  // k + 100
    CHECK(cfg.banzhaf_samples == 500);
    CHECK(cfg.calibration == CalibrationKind::ets);
    CHECK(cfg.train.hidden_dim == 16);
    CHECK(cfg.train.max_epochs == 300);
    CHECK(cfg.train.patience == 30);
}

TEST_CASE("pool_size_K config alias maps onto pool_K") {
    const auto cfg = run_config_from_json_text(R"({"select_k": 4, "pool_size_K": 9})");
    CHECK(cfg.pool_K == 9);
}
