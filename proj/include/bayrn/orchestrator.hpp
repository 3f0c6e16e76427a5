#ifndef BAYRN_ORCHESTRATOR_HPP
#define BAYRN_ORCHESTRATOR_HPP

#include "bayrn/envs.hpp"
#include "bayrn/strategies.hpp"
#include "bayrn/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bayrn {

enum class RunnerKind { BayRnTune, VanillaDr, BayesianDr, Oracle };

std::string runner_name(RunnerKind kind);
RunnerKind runner_from_name(const std::string& name);

struct ExperimentConfig {
    EnvId env = EnvId::PuckSlide1D;
    StrategyKind strategy;  // infinite-chain by default
    int n_iterations = 20;  // BO iterations after the bootstrap
    std::int64_t t_bootstrap = 160000;
    std::int64_t t_tune = 32000;
    std::int64_t t_scratch = 0;  // 0 means t_bootstrap
    int n_eval = 8;              // real-eval episodes per iteration
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    EsConfig es;
    DrMode dr_mode;
    bool bootstrap_full_range = false;
    ParamVec gt_phi;    // empty: env default ground truth
    ParamVec gt_noise;  // empty: env default episode noise
    std::vector<RunnerKind> runners{RunnerKind::BayRnTune, RunnerKind::VanillaDr,
                                    RunnerKind::BayesianDr, RunnerKind::Oracle};
    std::string aggregate = "median";
    std::string output_dir;  // empty: resolved by the CLI
};

// Throws invalid_argument naming the offending field.
void validate_config(const ExperimentConfig& cfg);

// t_bootstrap + n_iterations * t_tune, shared by all runners.
std::int64_t total_budget(const ExperimentConfig& cfg);
std::int64_t scratch_budget(const ExperimentConfig& cfg);

struct IterationRow {
    int iteration = 0;
    int parent = -1;   // lineage; -1 marks a fresh initialization
    ParamVec phi;      // NaN components when no single training phi exists
    double reward = 0.0;
    std::int64_t consumed = 0;    // steps spent by this iteration
    std::int64_t cumulative = 0;  // running total
};

struct RunRecord {
    RunnerKind runner = RunnerKind::BayRnTune;
    std::uint64_t seed = 0;
    std::vector<IterationRow> rows;
    int best_iteration = 0;  // argmax reward, oldest on ties
    double best_reward = 0.0;
};

struct CurvePoint {
    std::int64_t cumulative_steps = 0;
    double max_historical_reward = 0.0;
};

// Running max of reward vs cumulative steps; nondecreasing by construction.
std::vector<CurvePoint> max_historical_curve(const RunRecord& record);

// Pointwise median or mean over seeds. Curves on different step grids are
// resampled to the union grid by last-value carry-forward.
std::vector<CurvePoint> aggregate_seeds(
    const std::vector<std::vector<CurvePoint>>& curves, const std::string& mode);

// Each runner writes history.csv, curves.csv, train_curves.csv, and
// checkpoint files into run_dir as it goes, so an aborted run leaves a
// partial record on disk. BO-based runners also write bo_observations.csv.
RunRecord run_bayrntune(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::filesystem::path& run_dir);
RunRecord run_vanilla_dr(const ExperimentConfig& cfg, std::uint64_t seed,
                         const std::filesystem::path& run_dir);
RunRecord run_bayesian_dr(const ExperimentConfig& cfg, std::uint64_t seed,
                          const std::filesystem::path& run_dir);
RunRecord run_oracle(const ExperimentConfig& cfg, std::uint64_t seed,
                     const std::filesystem::path& run_dir);
RunRecord run_one(RunnerKind kind, const ExperimentConfig& cfg,
                  std::uint64_t seed, const std::filesystem::path& run_dir);

// The env spec and hidden ground truth an experiment runs against.
EnvSpec experiment_spec(const ExperimentConfig& cfg);
GroundTruth experiment_ground_truth(const ExperimentConfig& cfg);

}  // namespace bayrn

#endif  // BAYRN_ORCHESTRATOR_HPP
