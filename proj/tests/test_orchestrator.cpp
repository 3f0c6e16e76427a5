#include "bayrn/orchestrator.hpp"

#include "bayrn/csv.hpp"
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace bayrn;
namespace fs = std::filesystem;

namespace {

// puck-slide budgets divisible by one ES generation (16 * 200 = 3200), so
// step accounting comes out exact; ES settings strong enough to actually
// move the puck at this scale
ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.env = EnvId::PuckSlide1D;
    cfg.n_iterations = 3;
    cfg.t_bootstrap = 6400;
    cfg.t_tune = 3200;
    cfg.n_eval = 2;
    cfg.seeds = {1};
    cfg.es.noise_std = 0.2;
    cfg.es.step_size = 1.0;
    return cfg;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "bayrn_orch_tests" / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE("orchestrator") {

TEST_CASE("config validation names the offending field") {
    auto bad = tiny_config();
    bad.n_iterations = 0;
    CHECK_THROWS_WITH_AS(validate_config(bad), doctest::Contains("n_iterations"),
                         std::invalid_argument);

    bad = tiny_config();
    bad.t_tune = 100;  // below one generation
    CHECK_THROWS_WITH_AS(validate_config(bad), doctest::Contains("t_tune"),
                         std::invalid_argument);

    bad = tiny_config();
    bad.seeds.clear();
    CHECK_THROWS_WITH_AS(validate_config(bad), doctest::Contains("seeds"),
                         std::invalid_argument);

    bad = tiny_config();
    bad.aggregate = "max";
    CHECK_THROWS_WITH_AS(validate_config(bad), doctest::Contains("aggregate"),
                         std::invalid_argument);

    bad = tiny_config();
    bad.t_scratch = 1 << 20;  // larger than the whole budget
    CHECK_THROWS_WITH_AS(validate_config(bad), doctest::Contains("t_scratch"),
                         std::invalid_argument);

    bad = tiny_config();
    bad.gt_phi = Eigen::Vector2d(0.1, 1.0);  // friction below the range
    CHECK_THROWS_WITH_AS(validate_config(bad), doctest::Contains("ground_truth"),
                         std::invalid_argument);

    bad = tiny_config();
    bad.gt_noise = Eigen::Vector2d(-0.01, 0.01);
    CHECK_THROWS_WITH_AS(validate_config(bad), doctest::Contains("gt_noise"),
                         std::invalid_argument);

    CHECK_NOTHROW(validate_config(tiny_config()));
    CHECK(total_budget(tiny_config()) == 6400 + 3 * 3200);
    CHECK(scratch_budget(tiny_config()) == 6400);
}

TEST_CASE("bayrntune run structure and accounting") {
    auto cfg = tiny_config();
    cfg.n_iterations = 1;
    const fs::path dir = fresh_dir("brt_n1");
    const RunRecord rec = run_bayrntune(cfg, 7, dir);

    REQUIRE(rec.rows.size() == 2);  // bootstrap + one iteration
    CHECK(rec.rows[0].iteration == 0);
    CHECK(rec.rows[0].parent == -1);
    CHECK(rec.rows[1].iteration == 1);
    CHECK(rec.rows[1].parent == 0);
    CHECK(rec.rows[0].consumed == 6400);
    CHECK(rec.rows[1].consumed == 3200);
    CHECK(rec.rows[1].cumulative == total_budget(cfg));

    const double top = std::max(rec.rows[0].reward, rec.rows[1].reward);
    CHECK(rec.best_reward == top);

    for (const char* f :
         {"history.csv", "curves.csv", "train_curves.csv", "bo_observations.csv"})
        CHECK(fs::exists(dir / f));
    CHECK(fs::exists(dir / "ckpt_0.bin"));
    CHECK(fs::exists(dir / "ckpt_1.bin"));

    // one BO row for the bootstrap observation and one per iteration
    CHECK(csv::read_file(dir / "bo_observations.csv").size() == 1 + 2);
    CHECK(csv::read_file(dir / "history.csv").size() == 1 + 2);

    // checkpoints carry the run metadata
    const Checkpoint c1 = load_checkpoint((dir / "ckpt_1.bin").string());
    CHECK(c1.meta.iteration == 1);
    CHECK(c1.meta.parent_iteration == 0);
    CHECK(c1.meta.reward == rec.rows[1].reward);
    CHECK(c1.meta.phi == rec.rows[1].phi);
}

TEST_CASE("bayrntune lineage follows the chosen strategy") {
    auto cfg = tiny_config();
    const RunRecord chain = run_bayrntune(cfg, 3, fresh_dir("brt_chain"));
    for (std::size_t i = 1; i < chain.rows.size(); ++i)
        CHECK(chain.rows[i].parent == chain.rows[i].iteration - 1);

    cfg.strategy = StrategyKind::parse("best-only");
    const RunRecord best = run_bayrntune(cfg, 3, fresh_dir("brt_best"));
    for (std::size_t i = 1; i < best.rows.size(); ++i) {
        int want = 0;
        for (std::size_t j = 1; j < i; ++j)
            if (best.rows[j].reward > best.rows[std::size_t(want)].reward)
                want = int(j);
        CHECK(best.rows[i].parent == want);
    }

    // lineage links always reach the bootstrap without cycles
    cfg.strategy = StrategyKind::parse("normalized-closest");
    const RunRecord closest = run_bayrntune(cfg, 3, fresh_dir("brt_closest"));
    for (const auto& row : closest.rows) {
        int at = row.iteration;
        int hops = 0;
        while (at != 0) {
            REQUIRE(hops++ <= int(closest.rows.size()));
            const int parent = closest.rows[std::size_t(at)].parent;
            CHECK(parent >= 0);
            CHECK(parent < at);
            at = parent;
        }
    }
}

TEST_CASE("same seed reproduces a bit-identical run") {
    const auto cfg = tiny_config();
    const fs::path a = fresh_dir("det_a");
    const fs::path b = fresh_dir("det_b");
    const RunRecord ra = run_bayrntune(cfg, 11, a);
    const RunRecord rb = run_bayrntune(cfg, 11, b);

    REQUIRE(ra.rows.size() == rb.rows.size());
    for (std::size_t i = 0; i < ra.rows.size(); ++i) {
        CHECK(ra.rows[i].phi == rb.rows[i].phi);
        CHECK(ra.rows[i].reward == rb.rows[i].reward);
        CHECK(ra.rows[i].parent == rb.rows[i].parent);
        CHECK(ra.rows[i].cumulative == rb.rows[i].cumulative);
    }
    for (const char* f : {"history.csv", "train_curves.csv", "bo_observations.csv"})
        CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / "ckpt_3.bin") == slurp(b / "ckpt_3.bin"));

    const RunRecord rc = run_bayrntune(cfg, 12, fresh_dir("det_c"));
    bool any_differs = false;
    for (std::size_t i = 0; i < ra.rows.size(); ++i)
        any_differs = any_differs || ra.rows[i].reward != rc.rows[i].reward ||
                      ra.rows[i].phi != rc.rows[i].phi;
    CHECK(any_differs);
}

TEST_CASE("vanilla DR trains one lineage over the whole box") {
    const auto cfg = tiny_config();
    const fs::path dir = fresh_dir("vanilla");
    const RunRecord rec = run_vanilla_dr(cfg, 5, dir);

    REQUIRE(rec.rows.size() == std::size_t(cfg.n_iterations) + 1);
    CHECK_FALSE(fs::exists(dir / "bo_observations.csv"));  // no BO state
    for (const auto& row : rec.rows) {
        for (Eigen::Index k = 0; k < row.phi.size(); ++k)
            CHECK(std::isnan(row.phi[k]));  // no single training phi
        CHECK(row.parent == row.iteration - 1);
    }
    CHECK(rec.rows.back().cumulative == total_budget(cfg));
    CHECK(max_historical_curve(rec).size() == std::size_t(cfg.n_iterations) + 1);
}

TEST_CASE("oracle trains at the ground truth") {
    const auto cfg = tiny_config();
    const fs::path dir = fresh_dir("oracle");
    const RunRecord rec = run_oracle(cfg, 5, dir);
    const GroundTruth gt = experiment_ground_truth(cfg);

    REQUIRE(rec.rows.size() == std::size_t(cfg.n_iterations) + 1);
    CHECK_FALSE(fs::exists(dir / "bo_observations.csv"));
    for (const auto& row : rec.rows) CHECK(row.phi == gt.phi_star);
    CHECK(rec.rows.back().cumulative == total_budget(cfg));

    // ground-truth overrides flow through
    auto cfg2 = tiny_config();
    cfg2.gt_phi = Eigen::Vector2d(1.0, 0.5);
    const RunRecord rec2 = run_oracle(cfg2, 5, fresh_dir("oracle_gt"));
    CHECK(rec2.rows[0].phi == cfg2.gt_phi);
}

TEST_CASE("bayesian DR retrains from scratch each iteration") {
    const auto cfg = tiny_config();  // t_scratch defaults to t_bootstrap = 6400
    const fs::path dir = fresh_dir("bayes_dr");
    const RunRecord rec = run_bayesian_dr(cfg, 5, dir);

    // floor(16000 / 6400) = 2 iterations at equal total budget
    REQUIRE(rec.rows.size() == 2);
    CHECK(rec.rows.size() < std::size_t(cfg.n_iterations) + 1);
    for (const auto& row : rec.rows) CHECK(row.parent == -1);
    CHECK(rec.rows.back().cumulative == 2 * scratch_budget(cfg));
    CHECK(fs::exists(dir / "bo_observations.csv"));
    CHECK(csv::read_file(dir / "bo_observations.csv").size() == 1 + 2);
}

TEST_CASE("budget parity across equal-budget runners") {
    const auto cfg = tiny_config();
    const std::int64_t gen = std::int64_t(cfg.es.population) * 200;
    const RunRecord brt = run_bayrntune(cfg, 2, fresh_dir("par_brt"));
    const RunRecord van = run_vanilla_dr(cfg, 2, fresh_dir("par_van"));
    const RunRecord orc = run_oracle(cfg, 2, fresh_dir("par_orc"));
    for (const RunRecord* r : {&brt, &van, &orc}) {
        CHECK(r->rows.back().cumulative >= total_budget(cfg));
        CHECK(r->rows.back().cumulative < total_budget(cfg) + gen);
    }
}

TEST_CASE("every runner emits a monotone curve with increasing steps") {
    const auto cfg = tiny_config();
    int tag = 0;
    for (const RunnerKind kind :
         {RunnerKind::BayRnTune, RunnerKind::VanillaDr, RunnerKind::BayesianDr,
          RunnerKind::Oracle}) {
        const RunRecord rec =
            run_one(kind, cfg, 9, fresh_dir("mono_" + std::to_string(tag++)));
        CHECK(rec.runner == kind);
        const auto curve = max_historical_curve(rec);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i].max_historical_reward >=
                  curve[i - 1].max_historical_reward);
            CHECK(curve[i].cumulative_steps > curve[i - 1].cumulative_steps);
        }
        CHECK(runner_from_name(runner_name(kind)) == kind);
    }
    CHECK_THROWS_AS(runner_from_name("gradient-descent"), std::invalid_argument);
}

TEST_CASE("max_historical_curve is a running maximum") {
    RunRecord rec;
    const std::vector<double> rewards{2, 1, 3};
    for (int i = 0; i < 3; ++i) {
        IterationRow row;
        row.iteration = i;
        row.reward = rewards[std::size_t(i)];
        row.cumulative = 100 * (i + 1);
        rec.rows.push_back(row);
    }
    const auto curve = max_historical_curve(rec);
    REQUIRE(curve.size() == 3);
    CHECK(curve[0].max_historical_reward == 2);
    CHECK(curve[1].max_historical_reward == 2);
    CHECK(curve[2].max_historical_reward == 3);

    for (auto& row : rec.rows) row.reward = 5.0;
    for (const auto& p : max_historical_curve(rec))
        CHECK(p.max_historical_reward == 5.0);
}

TEST_CASE("aggregate_seeds matches hand-computed values") {
    const std::vector<std::vector<CurvePoint>> three{
        {{10, 1.0}}, {{10, 2.0}}, {{10, 9.0}}};
    const auto med = aggregate_seeds(three, "median");
    REQUIRE(med.size() == 1);
    CHECK(med[0].max_historical_reward == 2.0);
    const auto mean = aggregate_seeds(three, "mean");
    CHECK(mean[0].max_historical_reward == 4.0);

    const std::vector<std::vector<CurvePoint>> one{{{10, 1.0}, {20, 3.0}}};
    for (const char* mode : {"median", "mean"}) {
        const auto same = aggregate_seeds(one, mode);
        REQUIRE(same.size() == 2);
        CHECK(same[0].max_historical_reward == 1.0);
        CHECK(same[1].max_historical_reward == 3.0);
    }

    CHECK_THROWS_AS(aggregate_seeds({}, "median"), std::invalid_argument);
    CHECK_THROWS_AS(aggregate_seeds(three, "max"), std::invalid_argument);

    // misaligned grids: carry the last value forward onto the union grid
    const std::vector<std::vector<CurvePoint>> two{
        {{10, 1.0}, {20, 5.0}}, {{15, 2.0}, {30, 4.0}}};
    const auto m = aggregate_seeds(two, "median");
    REQUIRE(m.size() == 3);  // grid {15, 20, 30}; 10 precedes curve B
    CHECK(m[0].cumulative_steps == 15);
    CHECK(m[0].max_historical_reward == 1.5);  // {1, 2}
    CHECK(m[1].cumulative_steps == 20);
    CHECK(m[1].max_historical_reward == 3.5);  // {5, 2}
    CHECK(m[2].cumulative_steps == 30);
    CHECK(m[2].max_historical_reward == 4.5);  // {5, 4}
}

}  // TEST_SUITE
