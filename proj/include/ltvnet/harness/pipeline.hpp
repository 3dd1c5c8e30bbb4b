#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltvnet/control/mpc.hpp"
#include "ltvnet/harness/config.hpp"
#include "ltvnet/structnet/training.hpp"
#include "ltvnet/verify/fidelity.hpp"

namespace ltvnet::harness {

namespace fs = std::filesystem;

// Output file names inside the run directory.
inline constexpr const char* kDatasetFile = "dataset.csv";
inline constexpr const char* kModelFile = "model.txt";
inline constexpr const char* kLossFile = "loss.csv";
inline constexpr const char* kControlSummaryFile = "control_summary.txt";
inline constexpr const char* kFidelityFile = "fidelity.csv";
inline constexpr const char* kModelFidelityFile = "model_fidelity.csv";
inline constexpr const char* kVerifySummaryFile = "verify_summary.txt";

fs::path episode_file(std::size_t episode);

// Seed streams split off the config seed.
std::uint64_t split_seed(const ExperimentConfig& config);
std::uint64_t init_seed(const ExperimentConfig& config);
std::uint64_t train_seed(const ExperimentConfig& config);
std::uint64_t episode_seed(const ExperimentConfig& config, std::size_t episode);

// ---- task success -------------------------------------------------------

// Index into `states` at which the task predicate is first met (for the
// cart-pole, the state completing 100 consecutive upright steps).
std::optional<std::size_t> success_step(const envs::EnvSpec& spec,
                                        std::span<const Vector> states, const Vector& goal);

// Stop predicate for mpc_run matching success_step. Stateful for the
// cart-pole, so make a fresh one per episode.
std::function<bool(const Vector&)> stop_predicate(const envs::EnvSpec& spec, const Vector& goal);

// ---- subcommands --------------------------------------------------------

struct CollectOutcome {
    fs::path dataset;
    std::size_t rows = 0;
};
CollectOutcome run_collect(const ExperimentConfig& config);

struct TrainOutcome {
    fs::path model;
    fs::path loss_csv;
    structnet::TrainingReport report;
};
TrainOutcome run_train(const ExperimentConfig& config, const fs::path& dataset);

struct Episode {
    std::size_t index = 0;
    Vector x0;
    Vector goal;
    control::MpcResult result;
    std::optional<std::size_t> steps_to_goal;
    fs::path csv;
};

struct ControlOutcome {
    std::vector<Episode> episodes;
    std::size_t successes = 0;
    double median_steps_to_goal = 0.0;  // NaN when nothing succeeded
    fs::path summary;
};

// Initial state and goal of one episode (both derived from episode_seed).
std::pair<Vector, Vector> episode_setup(const ExperimentConfig& config, std::size_t episode);

// CSV columns: step, x_*, u_*, planned_cost, goal_*. One row per executed
// state; the final row has no control, so its u_* and planned_cost are nan.
std::string format_episode_csv(const Episode& episode);

ControlOutcome run_control(const ExperimentConfig& config, const fs::path& model,
                           std::size_t episodes);

struct VerifyOutcome {
    verify::FidelityReport fidelity;
    verify::ModelFidelity rollouts;
    double audit_error = 0.0;
    fs::path summary;
};
VerifyOutcome run_verify(const ExperimentConfig& config, const fs::path& model,
                         const fs::path& dataset);

struct ReportOutcome {
    std::vector<fs::path> written;
    std::vector<std::string> warnings;
};
// Renders episode_*.csv and loss.csv found in `run_dir` to SVG. Throws
// DataError if there is nothing to render.
ReportOutcome run_report(const fs::path& run_dir);

}  // namespace ltvnet::harness
