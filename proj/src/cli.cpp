#include "bayrn/cli.hpp"

#include "bayrn/config.hpp"
#include "bayrn/csv.hpp"
#include "bayrn/orchestrator.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

namespace bayrn {
namespace {

namespace fs = std::filesystem;

// --out flag beats the config file, which beats the environment.
std::string out_root(const std::string& flag, const std::string& cfg_dir) {
    if (!flag.empty()) return flag;
    if (!cfg_dir.empty()) return cfg_dir;
    if (const char* env = std::getenv("BAYRNTUNE_OUT"); env && *env) return env;
    return "runs";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void emit(const std::string& text, const std::string& out_file) {
    if (out_file.empty())
        std::cout << text;
    else
        write_text(out_file, text);
}

struct SeedCurve {
    std::string runner;
    std::string seed;
    std::vector<CurvePoint> points;
};

SeedCurve read_seed_curve(const fs::path& dir) {
    const auto rows = csv::read_file(dir / "curves.csv");
    const std::vector<std::string> header{"runner", "seed", "cumulative_steps",
                                          "max_historical_reward"};
    if (rows.size() < 2 || rows[0] != header)
        throw std::runtime_error("unexpected curves.csv schema in " + dir.string());
    SeedCurve c;
    c.runner = rows[1][0];
    c.seed = rows[1][1];
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != header.size() || rows[i][0] != c.runner ||
            rows[i][1] != c.seed)
            throw std::runtime_error("inconsistent curves.csv in " + dir.string());
        c.points.push_back(
            {csv::parse_int(rows[i][2]), csv::parse_double(rows[i][3])});
    }
    return c;
}

// One curve per run dir, grouped by runner name; map keeps output order
// stable across invocations.
std::map<std::string, std::vector<std::vector<CurvePoint>>> group_curves(
    const std::vector<std::string>& dirs) {
    std::map<std::string, std::vector<std::vector<CurvePoint>>> groups;
    for (const std::string& dir : dirs) {
        SeedCurve c = read_seed_curve(dir);
        groups[c.runner].push_back(std::move(c.points));
    }
    return groups;
}

ExperimentConfig effective_config(const std::string& config_path,
                                  const std::vector<std::string>& overrides,
                                  std::string* raw_text) {
    const ConfigFile file = load_config(config_path);
    ExperimentConfig cfg = file.experiment;
    for (const std::string& o : overrides) apply_override(cfg, o);
    validate_config(cfg);
    if (raw_text) *raw_text = file.text;
    return cfg;
}

int cmd_run(const std::string& config_path, std::vector<std::string> overrides,
            const std::string& seeds_flag,
            const std::vector<std::string>& runner_flags,
            const std::string& out_flag, bool force) {
    // fold the dedicated flags into overrides so the snapshot replays exactly
    if (!seeds_flag.empty()) overrides.push_back("seeds=" + seeds_flag);
    if (!runner_flags.empty()) {
        std::string joined;
        for (const std::string& r : runner_flags)
            joined += (joined.empty() ? "" : ",") + r;
        overrides.push_back("runners=" + joined);
    }

    std::string raw_text;
    ExperimentConfig cfg;
    try {
        cfg = effective_config(config_path, overrides, &raw_text);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    }

    const fs::path root = out_root(out_flag, cfg.output_dir);
    struct Job {
        RunnerKind kind;
        std::uint64_t seed;
        fs::path dir;
    };
    std::vector<Job> jobs;
    for (const RunnerKind kind : cfg.runners)
        for (const std::uint64_t seed : cfg.seeds)
            jobs.push_back({kind, seed,
                            root / (runner_name(kind) + "_seed" +
                                    std::to_string(seed))});

    if (!force) {
        for (const Job& j : jobs)
            if (fs::exists(j.dir)) {
                std::cerr << "refusing to overwrite " << j.dir.string()
                          << " (pass --force to replace it)\n";
                return kExitUsage;
            }
    }

    const std::string snapshot = snapshot_text(raw_text, overrides);
    try {
        for (const Job& j : jobs) {
            fs::remove_all(j.dir);
            fs::create_directories(j.dir);
            write_text(j.dir / "config.snapshot", snapshot);
            const std::string tag =
                "(" + runner_name(j.kind) + ", " + std::to_string(j.seed) + ") ";
            std::cout << tag << "running -> " << j.dir.string() << std::endl;
            const RunRecord rec = run_one(j.kind, cfg, j.seed, j.dir);
            std::cout << tag << "best reward " << csv::format(rec.best_reward)
                      << " at iteration " << rec.best_iteration << std::endl;
        }
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    for (const Job& j : jobs) std::cout << j.dir.string() << '\n';
    return kExitOk;
}

int cmd_validate(const std::string& config_path,
                 const std::vector<std::string>& overrides) {
    try {
        effective_config(config_path, overrides, nullptr);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::cout << "config ok\n";
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& mode,
                const std::string& out_file) {
    try {
        const auto groups = group_curves(dirs);
        if (groups.size() < 2)
            throw std::runtime_error("compare needs at least two runner groups");

        struct Row {
            std::string runner;
            std::size_t seeds;
            double final_reward;
        };
        std::vector<Row> rows;
        for (const auto& [runner, curves] : groups) {
            const auto agg = aggregate_seeds(curves, mode);
            rows.push_back({runner, curves.size(), agg.back().max_historical_reward});
        }
        double weakest = rows.front().final_reward;
        for (const Row& r : rows) weakest = std::min(weakest, r.final_reward);

        std::string table = "runner              seeds  final_reward  vs_weakest\n";
        std::string csv_text = "runner,seeds,final_reward,ratio_vs_weakest\n";
        for (const Row& r : rows) {
            const double ratio = r.final_reward / weakest;
            char line[160];
            std::snprintf(line, sizeof line, "%-18s %6zu  %12.4f  %10.4f\n",
                          r.runner.c_str(), r.seeds, r.final_reward, ratio);
            table += line;
            csv_text += csv::join({r.runner, csv::format(std::int64_t(r.seeds)),
                                   csv::format(r.final_reward),
                                   csv::format(ratio)}) +
                        '\n';
        }
        std::cout << table;
        if (!out_file.empty()) write_text(out_file, csv_text);
    } catch (const std::exception& e) {
        std::cerr << "compare failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_curve(const std::vector<std::string>& dirs, const std::string& mode,
              const std::string& out_file) {
    try {
        std::string text = "runner,cumulative_steps,max_historical_reward\n";
        for (const auto& [runner, curves] : group_curves(dirs))
            for (const CurvePoint& p : aggregate_seeds(curves, mode))
                text += csv::join({runner, csv::format(p.cumulative_steps),
                                   csv::format(p.max_historical_reward)}) +
                        '\n';
        emit(text, out_file);
    } catch (const std::exception& e) {
        std::cerr << "curve failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_scatter(const std::string& dir, const std::string& out_file) {
    try {
        const fs::path run_dir(dir);
        const auto rows = csv::read_file(run_dir / "history.csv");
        if (rows.size() < 2 || rows[0].size() < 6)
            throw std::runtime_error("unexpected history.csv schema in " + dir);
        const std::size_t ncol = rows[0].size();
        const std::size_t dim = ncol - 5;  // iteration, parent, ..., 3 trailing

        const ConfigFile snap = load_config(run_dir / "config.snapshot");
        const GroundTruth gt = experiment_ground_truth(snap.experiment);
        if (std::size_t(gt.phi_star.size()) != dim)
            throw std::runtime_error("history dims do not match the snapshot");

        std::string text = "iteration";
        for (std::size_t k = 0; k < dim; ++k) text += "," + rows[0][2 + k];
        text += ",reward,is_ground_truth\n";
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() != ncol)
                throw std::runtime_error("ragged history.csv row in " + dir);
            text += rows[i][0];
            for (std::size_t k = 0; k < dim; ++k) text += "," + rows[i][2 + k];
            text += "," + rows[i][ncol - 3] + ",0\n";
        }
        std::vector<std::string> gt_row{"-1"};
        for (Eigen::Index k = 0; k < gt.phi_star.size(); ++k)
            gt_row.push_back(csv::format(gt.phi_star[k]));
        gt_row.push_back("nan");
        gt_row.push_back("1");
        text += csv::join(gt_row) + '\n';
        emit(text, out_file);
    } catch (const std::exception& e) {
        std::cerr << "scatter failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Bayesian domain randomization with fine-tuned checkpoints",
                 "bayrntune"};
    app.require_subcommand(1);

    std::string config_path, seeds_flag, out_flag, mode = "median", out_file;
    std::vector<std::string> overrides, runner_flags, dirs;
    std::string scatter_dir;
    bool force = false;

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--override", overrides, "key=value applied over the file");
    };

    CLI::App* run = app.add_subcommand("run", "launch runners across seeds");
    add_config_opts(run);
    run->add_option("--seeds", seeds_flag, "comma-separated seed list");
    run->add_option("--runner", runner_flags, "restrict to these runners");
    run->add_option("--out", out_flag, "output root directory");
    run->add_flag("--force", force, "replace existing run directories");

    CLI::App* validate =
        app.add_subcommand("validate-config", "parse and check a config");
    add_config_opts(validate);

    CLI::App* compare =
        app.add_subcommand("compare", "final-reward table across run dirs");
    compare->add_option("dirs", dirs, "run directories")->required();
    compare->add_option("--aggregate", mode, "median or mean");
    compare->add_option("--out", out_file, "also write the table as CSV");

    CLI::App* curve =
        app.add_subcommand("curve", "aggregated max-historical curves as CSV");
    curve->add_option("dirs", dirs, "run directories")->required();
    curve->add_option("--aggregate", mode, "median or mean");
    curve->add_option("--out", out_file, "write CSV here instead of stdout");

    CLI::App* scatter =
        app.add_subcommand("scatter", "reward-over-phi CSV for one run dir");
    scatter->add_option("dir", scatter_dir, "run directory")->required();
    scatter->add_option("--out", out_file, "write CSV here instead of stdout");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (mode != "median" && mode != "mean") {
        std::cerr << "aggregate must be median or mean\n";
        return kExitUsage;
    }

    if (run->parsed())
        return cmd_run(config_path, overrides, seeds_flag, runner_flags,
                       out_flag, force);
    if (validate->parsed()) return cmd_validate(config_path, overrides);
    if (compare->parsed()) return cmd_compare(dirs, mode, out_file);
    if (curve->parsed()) return cmd_curve(dirs, mode, out_file);
    if (scatter->parsed()) return cmd_scatter(scatter_dir, out_file);
    return kExitUsage;
}

}  // namespace bayrn
