#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ltvnet/common.hpp"
#include "ltvnet/envs/env.hpp"

namespace ltvnet::harness {

// Everything an experiment run needs. Parsed from flat key=value text with
// dotted keys; fields left out of the file take env-specific defaults.
struct ExperimentConfig {
    std::string env;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "run";

    // collect.*
    std::size_t n_traj = 100;
    std::size_t max_steps = 200;
    std::size_t control_hold = 1;

    // train.*
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    std::vector<Eigen::Index> hidden = {64, 64};

    // cost.*
    Vector q;
    Vector r;
    Vector qf;
    Vector goal;

    // mpc.*
    std::size_t horizon = 50;
    std::size_t iterations = 20;
    Vector control_lo;
    Vector control_hi;

    // control.*
    std::size_t episodes = 10;
    std::size_t episode_steps = 300;
    bool random_goal = false;
    Vector init_lo;  // episode reset box
    Vector init_hi;

    // verify.*
    std::size_t verify_points = 100;
    std::size_t verify_directions = 20;
    std::size_t verify_rollouts = 20;
    std::size_t verify_horizon = 50;
    std::size_t audit_samples = 32;
};

// Defaults for a named environment (seed 0, out_dir "run").
ExperimentConfig default_config(std::string_view env);

// Parses config text. `env` and `seed` are mandatory; unknown keys,
// duplicate keys and malformed values throw UsageError naming `source`
// and the line.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical key=value rendering, every key present. Parsing it back and
// formatting again reproduces the same text.
std::string format_config(const ExperimentConfig& config);

// Throws UsageError if any vector disagrees with the env's dimensions.
void validate(const ExperimentConfig& config);

}  // namespace ltvnet::harness
