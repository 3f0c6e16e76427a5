#include "bayrn/orchestrator.hpp"

#include "bayrn/csv.hpp"
#include "bayrn/gp.hpp"
#include "bayrn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bayrn {

namespace {

constexpr std::uint64_t kStreamBoot = 0x626f6f74;
constexpr std::uint64_t kStreamFresh = 0x66726573;
constexpr std::uint64_t kStreamQuery = 0x71757279;
constexpr std::uint64_t kStreamTune = 0x74756e65;
constexpr std::uint64_t kStreamEval = 0x6576616c;

PolicyArch arch_for(const EnvSpec& spec) {
    return PolicyArch{env_obs_dim(spec.id), kPolicyHidden, kEnvActDim};
}

// Appends rows to the run-dir CSVs as the run progresses, flushing after
// every write so an aborted run still leaves a usable partial record.
class RunWriter {
public:
    RunWriter(const std::filesystem::path& dir, const EnvSpec& spec,
              RunnerKind runner, std::uint64_t seed, bool with_bo)
        : dir_(dir), runner_(runner_name(runner)), seed_(seed) {
        std::filesystem::create_directories(dir);
        history_.open(dir / "history.csv", std::ios::trunc);
        curves_.open(dir / "curves.csv", std::ios::trunc);
        train_.open(dir / "train_curves.csv", std::ios::trunc);
        if (!history_ || !curves_ || !train_)
            throw std::runtime_error("run: cannot write into " + dir.string());

        std::vector<std::string> hist_header{"iteration", "parent"};
        std::vector<std::string> bo_header{"iteration"};
        for (const auto& d : spec.dr_space.dims()) {
            hist_header.push_back("phi_" + d.name);
            bo_header.push_back("phi_" + d.name);
        }
        for (const char* c : {"reward", "consumed_steps", "cumulative_steps"})
            hist_header.push_back(c);
        history_ << csv::join(hist_header) << '\n';
        curves_ << "runner,seed,cumulative_steps,max_historical_reward\n";
        train_ << "iteration,cumulative_steps,mean_return\n";

        if (with_bo) {
            bo_.open(dir / "bo_observations.csv", std::ios::trunc);
            if (!bo_) throw std::runtime_error("run: cannot write bo log");
            for (const char* c : {"reward", "lengthscale", "signal_var", "noise_var"})
                bo_header.push_back(c);
            bo_ << csv::join(bo_header) << '\n';
        }
        flush();
    }

    std::string ckpt_path(int iteration) const {
        return (dir_ / ("ckpt_" + std::to_string(iteration) + ".bin")).string();
    }

    void row(const IterationRow& r, double running_max) {
        std::vector<std::string> cells{csv::format(std::int64_t(r.iteration)),
                                       csv::format(std::int64_t(r.parent))};
        for (Eigen::Index k = 0; k < r.phi.size(); ++k)
            cells.push_back(csv::format(r.phi[k]));
        cells.push_back(csv::format(r.reward));
        cells.push_back(csv::format(r.consumed));
        cells.push_back(csv::format(r.cumulative));
        history_ << csv::join(cells) << '\n';
        curves_ << runner_ << ',' << seed_ << ',' << csv::format(r.cumulative)
                << ',' << csv::format(running_max) << '\n';
        flush();
    }

    void train_curve(int iteration, std::int64_t offset,
                     const std::vector<TrainCurvePoint>& curve) {
        for (const auto& p : curve)
            train_ << iteration << ',' << csv::format(offset + p.cumulative_steps)
                   << ',' << csv::format(p.mean_return) << '\n';
        flush();
    }

    void bo_row(int iteration, const ParamVec& phi, double r, const GpHypers& h) {
        std::vector<std::string> cells{csv::format(std::int64_t(iteration))};
        for (Eigen::Index k = 0; k < phi.size(); ++k)
            cells.push_back(csv::format(phi[k]));
        cells.push_back(csv::format(r));
        cells.push_back(csv::format(h.lengthscales[0]));
        cells.push_back(csv::format(h.signal_var));
        cells.push_back(csv::format(h.noise_var));
        bo_ << csv::join(cells) << '\n';
        flush();
    }

private:
    void flush() {
        history_.flush();
        curves_.flush();
        train_.flush();
        if (bo_.is_open()) bo_.flush();
    }

    std::filesystem::path dir_;
    std::string runner_;
    std::uint64_t seed_;
    std::ofstream history_, curves_, train_, bo_;
};

void finalize(RunRecord& rec) {
    if (rec.rows.empty()) throw std::logic_error("run: produced no rows");
    const IterationRow* best = &rec.rows.front();
    for (const IterationRow& r : rec.rows)
        if (r.reward > best->reward) best = &r;
    rec.best_iteration = best->iteration;
    rec.best_reward = best->reward;
}

// Budget slices shared by the single-policy runners: one bootstrap-sized
// segment, then n_iterations tune-sized segments, evaluated at each boundary.
std::vector<std::int64_t> segment_sizes(const ExperimentConfig& cfg) {
    std::vector<std::int64_t> sizes{cfg.t_bootstrap};
    sizes.insert(sizes.end(), std::size_t(cfg.n_iterations), cfg.t_tune);
    return sizes;
}

// Shared loop for vanilla DR and the oracle: one policy carried across
// segments, differing only in how training episodes draw phi.
RunRecord run_segmented(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::filesystem::path& run_dir, RunnerKind kind,
                        PhiSampling sampling, const ParamVec& phi_train,
                        const ParamVec& band_std, bool record_phi) {
    validate_config(cfg);
    const EnvSpec spec = experiment_spec(cfg);
    const GroundTruth gt = experiment_ground_truth(cfg);
    RunWriter w(run_dir, spec, kind, seed, /*with_bo=*/false);

    RunRecord rec;
    rec.runner = kind;
    rec.seed = seed;

    const ParamVec phi_nan = ParamVec::Constant(
        spec.dr_space.size(), std::numeric_limits<double>::quiet_NaN());
    PolicyParams policy = policy_init(arch_for(spec), rng::derive(seed, kStreamFresh));
    std::int64_t cumulative = 0;
    double running_max = -std::numeric_limits<double>::infinity();

    const std::vector<std::int64_t> sizes = segment_sizes(cfg);
    for (int s = 0; s < int(sizes.size()); ++s) {
        const TrainResult res =
            pol_opt(policy, spec, phi_train, {sizes[std::size_t(s)]}, cfg.es,
                    rng::derive(seed, kStreamTune, std::uint64_t(s)), sampling,
                    band_std);
        policy = res.policy;
        w.train_curve(s, cumulative, res.curve);
        const double r = real_eval(spec, gt, policy, cfg.n_eval,
                                   rng::derive(seed, kStreamEval, std::uint64_t(s)));
        cumulative += res.consumed;

        IterationRow row;
        row.iteration = s;
        row.parent = s - 1;  // same policy continued; -1 on the first segment
        row.phi = record_phi ? phi_train : phi_nan;
        row.reward = r;
        row.consumed = res.consumed;
        row.cumulative = cumulative;
        rec.rows.push_back(row);

        CheckpointMeta meta;
        meta.iteration = s;
        meta.parent_iteration = row.parent;
        meta.reward = r;
        meta.phi = row.phi;
        save_checkpoint(w.ckpt_path(s), policy, meta);

        running_max = std::max(running_max, r);
        w.row(row, running_max);
    }
    finalize(rec);
    return rec;
}

}  // namespace

std::string runner_name(RunnerKind kind) {
    switch (kind) {
        case RunnerKind::BayRnTune: return "bayrntune";
        case RunnerKind::VanillaDr: return "vanilla-dr";
        case RunnerKind::BayesianDr: return "bayesian-dr";
        case RunnerKind::Oracle: return "oracle";
    }
    throw std::logic_error("runner: unreachable kind");
}

RunnerKind runner_from_name(const std::string& name) {
    if (name == "bayrntune") return RunnerKind::BayRnTune;
    if (name == "vanilla-dr") return RunnerKind::VanillaDr;
    if (name == "bayesian-dr") return RunnerKind::BayesianDr;
    if (name == "oracle") return RunnerKind::Oracle;
    throw std::invalid_argument("runner: unknown name '" + name + "'");
}

EnvSpec experiment_spec(const ExperimentConfig& cfg) {
    EnvSpec spec = make_env_spec(cfg.env);
    spec.dr_mode = cfg.dr_mode;
    return spec;
}

GroundTruth experiment_ground_truth(const ExperimentConfig& cfg) {
    const EnvSpec spec = experiment_spec(cfg);
    GroundTruth gt = default_ground_truth(spec);
    if (cfg.gt_phi.size() > 0) gt.phi_star = cfg.gt_phi;
    if (cfg.gt_noise.size() > 0) gt.episode_noise = cfg.gt_noise;
    return gt;
}

void validate_config(const ExperimentConfig& cfg) {
    const EnvSpec spec = make_env_spec(cfg.env);
    const std::int64_t generation =
        std::int64_t(cfg.es.population) * spec.horizon;
    if (cfg.n_iterations < 1)
        throw std::invalid_argument("config: n_iterations must be >= 1");
    if (cfg.t_bootstrap < generation)
        throw std::invalid_argument("config: t_bootstrap below one ES generation");
    if (cfg.t_tune < generation)
        throw std::invalid_argument("config: t_tune below one ES generation");
    if (cfg.t_scratch != 0 && cfg.t_scratch < generation)
        throw std::invalid_argument("config: t_scratch below one ES generation");
    if (cfg.n_eval < 1)
        throw std::invalid_argument("config: n_eval must be >= 1");
    if (cfg.seeds.empty())
        throw std::invalid_argument("config: seeds must be nonempty");
    if (cfg.runners.empty())
        throw std::invalid_argument("config: runners must be nonempty");
    if (cfg.aggregate != "median" && cfg.aggregate != "mean")
        throw std::invalid_argument("config: aggregate must be median or mean");
    if (scratch_budget(cfg) > total_budget(cfg))
        throw std::invalid_argument("config: t_scratch exceeds the total budget");
    if (cfg.gt_phi.size() > 0 &&
        (cfg.gt_phi.size() != spec.dr_space.size() ||
         !spec.dr_space.contains(cfg.gt_phi)))
        throw std::invalid_argument("config: ground_truth outside the DR space");
    if (cfg.gt_noise.size() > 0 &&
        (cfg.gt_noise.size() != spec.dr_space.size() ||
         (cfg.gt_noise.array() < 0.0).any()))
        throw std::invalid_argument("config: gt_noise must be >= 0 per dimension");
}

std::int64_t total_budget(const ExperimentConfig& cfg) {
    return cfg.t_bootstrap + std::int64_t(cfg.n_iterations) * cfg.t_tune;
}

std::int64_t scratch_budget(const ExperimentConfig& cfg) {
    return cfg.t_scratch > 0 ? cfg.t_scratch : cfg.t_bootstrap;
}

std::vector<CurvePoint> max_historical_curve(const RunRecord& record) {
    std::vector<CurvePoint> curve;
    double running = -std::numeric_limits<double>::infinity();
    for (const IterationRow& r : record.rows) {
        running = std::max(running, r.reward);
        curve.push_back({r.cumulative, running});
    }
    return curve;
}

std::vector<CurvePoint> aggregate_seeds(
    const std::vector<std::vector<CurvePoint>>& curves, const std::string& mode) {
    if (mode != "median" && mode != "mean")
        throw std::invalid_argument("aggregate: mode must be median or mean");
    if (curves.empty()) throw std::invalid_argument("aggregate: no curves");
    for (const auto& c : curves)
        if (c.empty()) throw std::invalid_argument("aggregate: empty curve");

    // union grid, starting where every curve has a value to carry forward
    std::vector<std::int64_t> grid;
    std::int64_t start = 0;
    for (const auto& c : curves) {
        start = std::max(start, c.front().cumulative_steps);
        for (const auto& p : c) grid.push_back(p.cumulative_steps);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    grid.erase(std::remove_if(grid.begin(), grid.end(),
                              [&](std::int64_t x) { return x < start; }),
               grid.end());
    if (grid.empty()) throw std::invalid_argument("aggregate: disjoint curves");

    std::vector<CurvePoint> out;
    std::vector<double> column(curves.size());
    for (const std::int64_t x : grid) {
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const auto& c = curves[i];
            double v = c.front().max_historical_reward;
            for (const auto& p : c) {
                if (p.cumulative_steps > x) break;
                v = p.max_historical_reward;
            }
            column[i] = v;
        }
        if (mode == "mean") {
            double acc = 0.0;
            for (const double v : column) acc += v;
            out.push_back({x, acc / double(column.size())});
        } else {
            std::vector<double> sorted = column;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t n = sorted.size();
            const double med = n % 2 ? sorted[n / 2]
                                     : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
            out.push_back({x, med});
        }
    }
    return out;
}

RunRecord run_bayrntune(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::filesystem::path& run_dir) {
    validate_config(cfg);
    const EnvSpec spec = experiment_spec(cfg);
    const GroundTruth gt = experiment_ground_truth(cfg);
    const DomainParamSpace& space = spec.dr_space;
    RunWriter w(run_dir, spec, RunnerKind::BayRnTune, seed, /*with_bo=*/true);

    RunRecord rec;
    rec.runner = RunnerKind::BayRnTune;
    rec.seed = seed;

    // bootstrap at the center of the space
    const ParamVec phi0 = space.center();
    RunningStats stats = update_stats(RunningStats(space.size()), phi0);
    const TrainResult boot =
        bootstrap_train(spec, cfg.es, cfg.t_bootstrap,
                        rng::derive(seed, kStreamBoot), cfg.bootstrap_full_range);
    w.train_curve(0, 0, boot.curve);
    const double r0 = real_eval(spec, gt, boot.policy, cfg.n_eval,
                                rng::derive(seed, kStreamEval, 0));
    std::int64_t cumulative = boot.consumed;

    CheckpointMeta meta0;
    meta0.iteration = 0;
    meta0.reward = r0;
    meta0.phi = phi0;
    save_checkpoint(w.ckpt_path(0), boot.policy, meta0);

    History h;
    h.push_back({0, w.ckpt_path(0), phi0, r0, -1});
    rec.rows.push_back({0, -1, phi0, r0, boot.consumed, cumulative});
    double running_max = r0;
    w.row(rec.rows.back(), running_max);

    // the bootstrap evaluation seeds the surrogate
    GpSurrogate gp = gp_fit({{phi0, r0}}, space);
    w.bo_row(0, phi0, r0, gp.hypers());

    for (int i = 1; i <= cfg.n_iterations; ++i) {
        const ParamVec phi = bo_query(
            gp, space, rng::derive(seed, kStreamQuery, std::uint64_t(i)));
        stats = update_stats(stats, phi);
        const int parent = select_checkpoint(cfg.strategy, phi, h, stats);
        const Checkpoint start = load_checkpoint(
            w.ckpt_path(parent), arch_for(spec));

        const TrainResult res =
            pol_opt(start.policy, spec, phi, {cfg.t_tune}, cfg.es,
                    rng::derive(seed, kStreamTune, std::uint64_t(i)));
        w.train_curve(i, cumulative, res.curve);
        const double r = real_eval(spec, gt, res.policy, cfg.n_eval,
                                   rng::derive(seed, kStreamEval, std::uint64_t(i)));
        cumulative += res.consumed;

        CheckpointMeta meta;
        meta.iteration = i;
        meta.parent_iteration = parent;
        meta.reward = r;
        meta.phi = phi;
        save_checkpoint(w.ckpt_path(i), res.policy, meta);

        h.push_back({i, w.ckpt_path(i), phi, r, parent});
        rec.rows.push_back({i, parent, phi, r, res.consumed, cumulative});
        running_max = std::max(running_max, r);
        w.row(rec.rows.back(), running_max);

        gp = bo_update(gp, phi, r);
        w.bo_row(i, phi, r, gp.hypers());
    }
    finalize(rec);
    return rec;
}

RunRecord run_vanilla_dr(const ExperimentConfig& cfg, std::uint64_t seed,
                         const std::filesystem::path& run_dir) {
    const EnvSpec spec = experiment_spec(cfg);
    return run_segmented(cfg, seed, run_dir, RunnerKind::VanillaDr,
                         PhiSampling::UniformBox, spec.dr_space.center(),
                         ParamVec(), /*record_phi=*/false);
}

RunRecord run_oracle(const ExperimentConfig& cfg, std::uint64_t seed,
                     const std::filesystem::path& run_dir) {
    const GroundTruth gt = experiment_ground_truth(cfg);
    return run_segmented(cfg, seed, run_dir, RunnerKind::Oracle,
                         PhiSampling::TruncBand, gt.phi_star, gt.episode_noise,
                         /*record_phi=*/true);
}

RunRecord run_bayesian_dr(const ExperimentConfig& cfg, std::uint64_t seed,
                          const std::filesystem::path& run_dir) {
    validate_config(cfg);
    const EnvSpec spec = experiment_spec(cfg);
    const GroundTruth gt = experiment_ground_truth(cfg);
    const DomainParamSpace& space = spec.dr_space;
    RunWriter w(run_dir, spec, RunnerKind::BayesianDr, seed, /*with_bo=*/true);

    RunRecord rec;
    rec.runner = RunnerKind::BayesianDr;
    rec.seed = seed;

    // from-scratch retraining fits fewer iterations into the same budget
    const std::int64_t t_scratch = scratch_budget(cfg);
    const int n_scratch = int(total_budget(cfg) / t_scratch);

    GpSurrogate gp;
    std::int64_t cumulative = 0;
    double running_max = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n_scratch; ++i) {
        const ParamVec phi = bo_query(
            gp, space, rng::derive(seed, kStreamQuery, std::uint64_t(i)));
        const PolicyParams fresh = policy_init(
            arch_for(spec), rng::derive(seed, kStreamFresh, std::uint64_t(i)));
        const TrainResult res =
            pol_opt(fresh, spec, phi, {t_scratch}, cfg.es,
                    rng::derive(seed, kStreamTune, std::uint64_t(i)));
        w.train_curve(i, cumulative, res.curve);
        const double r = real_eval(spec, gt, res.policy, cfg.n_eval,
                                   rng::derive(seed, kStreamEval, std::uint64_t(i)));
        cumulative += res.consumed;

        CheckpointMeta meta;
        meta.iteration = i;
        meta.reward = r;
        meta.phi = phi;
        save_checkpoint(w.ckpt_path(i), res.policy, meta);

        rec.rows.push_back({i, -1, phi, r, res.consumed, cumulative});
        running_max = std::max(running_max, r);
        w.row(rec.rows.back(), running_max);

        gp = gp.obs_count() == 0 ? gp_fit({{phi, r}}, space)
                                 : bo_update(gp, phi, r);
        w.bo_row(i, phi, r, gp.hypers());
    }
    finalize(rec);
    return rec;
}

RunRecord run_one(RunnerKind kind, const ExperimentConfig& cfg,
                  std::uint64_t seed, const std::filesystem::path& run_dir) {
    switch (kind) {
        case RunnerKind::BayRnTune: return run_bayrntune(cfg, seed, run_dir);
        case RunnerKind::VanillaDr: return run_vanilla_dr(cfg, seed, run_dir);
        case RunnerKind::BayesianDr: return run_bayesian_dr(cfg, seed, run_dir);
        case RunnerKind::Oracle: return run_oracle(cfg, seed, run_dir);
    }
    throw std::logic_error("runner: unreachable kind");
}

}  // namespace bayrn
