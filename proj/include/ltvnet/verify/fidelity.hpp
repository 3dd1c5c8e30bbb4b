#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ltvnet/envs/env.hpp"
#include "ltvnet/structnet/model.hpp"
#include "ltvnet/structnet/training.hpp"

namespace ltvnet::verify {

struct Quantiles {
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
};

Quantiles quantiles(std::vector<double> values);

struct FidelitySample {
    Vector x;
    Vector u;
    double cosine = 0.0;          // between flattened [A B] and the reference Jacobian
    double relative_error = 0.0;  // |[A B] - J|_F / |J|_F
    double sign_agreement = 0.0;  // fraction of directions d with <[A B] d, J d> > 0
    // Against the environment's analytic Jacobian; NaN when no env is given.
    double env_cosine = 0.0;
    double env_relative_error = 0.0;
};

struct FidelityReport {
    std::vector<FidelitySample> samples;
    Quantiles cosine;
    Quantiles relative_error;
    Quantiles sign_agreement;
    Quantiles env_cosine;
};

struct FidelityOptions {
    double fd_step = 1e-5;
    std::size_t directions = 20;
    std::uint64_t seed = 0;
    const envs::EnvSpec* env = nullptr;
};

using EvalPoint = std::pair<Vector, Vector>;

// N x (N+M) central-difference Jacobian of forward() with respect to [x; u].
Matrix reference_jacobian(const structnet::StructuredModel& model, const Vector& x,
                          const Vector& u, double step);

// Compares the predicted [A B] against the finite-difference Jacobian of
// the model's own forward map. The reference carries the dA/dx x and
// dB/dx u terms the prediction leaves out; the report measures that gap.
FidelityReport jacobian_fidelity(const structnet::StructuredModel& model,
                                 std::span<const EvalPoint> points,
                                 const FidelityOptions& options = {});

struct RolloutInput {
    Vector x0;
    std::vector<Vector> controls;
};

std::vector<RolloutInput> sample_rollout_inputs(const envs::EnvSpec& spec, std::size_t n_rollouts,
                                                std::size_t horizon, std::uint64_t seed);

struct ModelFidelity {
    std::vector<double> mean_error;   // entry k: mean |x_true - x_pred| after k+1 steps
    std::vector<std::size_t> counts;  // rollouts still alive at that step
    std::size_t truncated = 0;        // rollouts cut short by divergence or termination
};

ModelFidelity model_fidelity(const structnet::StructuredModel& model, const envs::EnvSpec& spec,
                             std::span<const RolloutInput> inputs);

// Random initial states from reset() and uniform random controls.
ModelFidelity model_fidelity(const structnet::StructuredModel& model, const envs::EnvSpec& spec,
                             std::size_t n_rollouts, std::size_t horizon, std::uint64_t seed);

// Max relative error (grad_check metric) of the dataset-error gradient with
// respect to every parameter of both subnets.
double gradient_audit(const structnet::StructuredModel& model,
                      std::span<const structnet::Transition> sample, double step = 1e-6);

// Report files. The CSV has one row per sample.
std::string format_fidelity_csv(const FidelityReport& report);
std::string format_model_fidelity_csv(const ModelFidelity& fidelity);

}  // namespace ltvnet::verify
