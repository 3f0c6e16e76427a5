#include "bayrn/config.hpp"

#include "bayrn/csv.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bayrn {
namespace {

std::string trim(const std::string& s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

bool to_bool(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::invalid_argument("expected true or false, got '" + v + "'");
}

int to_int(const std::string& v) {
    const std::int64_t x = csv::parse_int(v);
    if (x < INT32_MIN || x > INT32_MAX)
        throw std::invalid_argument("integer out of range: " + v);
    return int(x);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> items;
    for (const std::string& cell : csv::split(v)) {
        const std::string t = trim(cell);
        if (t.empty())
            throw std::invalid_argument("empty element in list '" + v + "'");
        items.push_back(t);
    }
    return items;
}

ParamVec to_vec(const std::string& v) {
    const auto items = split_list(v);
    ParamVec out(Eigen::Index(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i)
        out[Eigen::Index(i)] = csv::parse_double(items[i]);
    return out;
}

void set_key(ExperimentConfig& cfg, const std::string& key,
             const std::string& value) {
    if (key == "env") {
        cfg.env = env_id_from_name(value);
    } else if (key == "strategy") {
        cfg.strategy = StrategyKind::parse(value);
    } else if (key == "n_iterations") {
        cfg.n_iterations = to_int(value);
    } else if (key == "t_bootstrap") {
        cfg.t_bootstrap = csv::parse_int(value);
    } else if (key == "t_tune") {
        cfg.t_tune = csv::parse_int(value);
    } else if (key == "t_scratch") {
        cfg.t_scratch = csv::parse_int(value);
    } else if (key == "n_eval") {
        cfg.n_eval = to_int(value);
    } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& item : split_list(value)) {
            const std::int64_t s = csv::parse_int(item);
            if (s < 0) throw std::invalid_argument("seeds must be >= 0");
            cfg.seeds.push_back(std::uint64_t(s));
        }
    } else if (key == "es_population") {
        cfg.es.population = to_int(value);
    } else if (key == "es_noise_std") {
        cfg.es.noise_std = csv::parse_double(value);
    } else if (key == "es_step_size") {
        cfg.es.step_size = csv::parse_double(value);
    } else if (key == "es_antithetic") {
        cfg.es.antithetic = to_bool(value);
    } else if (key == "es_rank_shaping") {
        cfg.es.rank_shaping = to_bool(value);
    } else if (key == "dr_mode") {
        if (value == "point")
            cfg.dr_mode.kind = DrMode::Point;
        else if (value == "gaussian-band")
            cfg.dr_mode.kind = DrMode::GaussianBand;
        else
            throw std::invalid_argument("dr_mode must be point or gaussian-band");
    } else if (key == "dr_relative_std") {
        cfg.dr_mode.relative_std = csv::parse_double(value);
        if (!(cfg.dr_mode.relative_std >= 0.0))
            throw std::invalid_argument("dr_relative_std must be >= 0");
    } else if (key == "bootstrap_full_range") {
        cfg.bootstrap_full_range = to_bool(value);
    } else if (key == "ground_truth") {
        cfg.gt_phi = to_vec(value);
    } else if (key == "gt_noise") {
        cfg.gt_noise = to_vec(value);
    } else if (key == "runners") {
        cfg.runners.clear();
        for (const auto& item : split_list(value))
            cfg.runners.push_back(runner_from_name(item));
    } else if (key == "aggregate") {
        cfg.aggregate = value;
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else {
        throw std::invalid_argument("unknown key '" + key + "'");
    }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        try {
            if (eq == std::string::npos)
                throw std::invalid_argument("expected key = value");
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty()) throw std::invalid_argument("missing key");
            set_key(cfg, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": " +
                                        e.what());
        }
    }
    validate_config(cfg);
    return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("config: cannot open " + path.string());
    ConfigFile file;
    file.text = std::string(std::istreambuf_iterator<char>(in), {});
    file.experiment = parse_config_text(file.text);
    return file;
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override '" + assignment +
                                    "' is not key=value");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    try {
        set_key(cfg, key, value);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("override '" + assignment + "': " + e.what());
    }
}

std::string snapshot_text(const std::string& original,
                          const std::vector<std::string>& overrides) {
    std::string out = original;
    if (!out.empty() && out.back() != '\n') out += '\n';
    if (!overrides.empty()) {
        out += "# command-line overrides\n";
        for (const std::string& o : overrides) {
            const std::size_t eq = o.find('=');
            out += trim(o.substr(0, eq)) + " = " + trim(o.substr(eq + 1)) + '\n';
        }
    }
    return out;
}

}  // namespace bayrn
