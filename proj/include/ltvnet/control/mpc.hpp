#pragma once

#include <functional>
#include <vector>

#include "ltvnet/control/ilqr.hpp"

namespace ltvnet::control {

struct MpcResult {
    envs::Trajectory executed;
    std::vector<double> planned_costs;       // one per executed step
    std::vector<std::size_t> failed_steps;   // steps where planning threw; zero control applied
    bool stopped_early = false;              // stop predicate fired
};

// Receding-horizon loop: plan with ilqr_solve (warm-started by the previous
// plan shifted one step, last control repeated), apply the first control to
// the true environment, repeat. Ends after `steps` steps, on environment
// termination, or when `stop_when` (if set) holds for the newest state.
MpcResult mpc_run(const envs::EnvSpec& spec, const structnet::StructuredModel& model,
                  const CostSpec& cost, const MPCConfig& config, const Vector& x0,
                  std::size_t steps, const std::function<bool(const Vector&)>& stop_when = {});

}  // namespace ltvnet::control
