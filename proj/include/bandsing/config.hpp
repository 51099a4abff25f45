#pragma once

// Campaign configuration files.
//
//   # comment
//   [profile]     kind, d (integer or "auto"), offband
//   [campaign]    n_list, alpha, trials, master_seed, threads
//   [constants]   rho, tau, mu, K
//   [prime]       policy (fixed | choose | integer), p, cap
//   [row]         policy (fixed | uniform | center), index
//
// Every line is "key = value". Unknown sections and keys are errors, and
// rationals must be written exactly ("1/4", never "0.25"). Integers may be
// written as powers of two ("2^20").

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandsing/experiments.hpp"

namespace bandsing {

/// Carries every problem found in a file, parse errors and validation alike.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> problems);
    std::vector<std::string> problems;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical file text; parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace bandsing
