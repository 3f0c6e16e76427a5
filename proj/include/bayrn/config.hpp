#ifndef BAYRN_CONFIG_HPP
#define BAYRN_CONFIG_HPP

#include "bayrn/orchestrator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace bayrn {

// Flat `key = value` config text. '#' starts a comment, blank lines are
// skipped, later duplicates win, unknown keys fail with their line number.
ExperimentConfig parse_config_text(const std::string& text);

struct ConfigFile {
    ExperimentConfig experiment;
    std::string text;  // verbatim file content, kept for the run snapshot
};

ConfigFile load_config(const std::filesystem::path& path);

// Applies one "key=value" override on top of a parsed config. Callers
// re-validate once after the last override, so order cannot matter.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// Original text plus one appended line per override, so the snapshot parses
// back to the exact effective config.
std::string snapshot_text(const std::string& original,
                          const std::vector<std::string>& overrides);

}  // namespace bayrn

#endif  // BAYRN_CONFIG_HPP
