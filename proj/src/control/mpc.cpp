#include "ltvnet/control/mpc.hpp"

#include <limits>

namespace ltvnet::control {

MpcResult mpc_run(const envs::EnvSpec& spec, const structnet::StructuredModel& model,
                  const CostSpec& cost, const MPCConfig& config, const Vector& x0,
                  std::size_t steps, const std::function<bool(const Vector&)>& stop_when) {
    if (steps == 0) throw UsageError("mpc_run needs at least one step");
    if (model.state_dim != spec.state_dim || model.control_dim != spec.control_dim) {
        throw DataError("model dimensions do not match environment '" + spec.name + "'");
    }
    validate(cost, spec.state_dim, spec.control_dim);
    validate(config, spec.control_dim);

    MpcResult result;
    auto& traj = result.executed;
    traj.dt = spec.dt;
    traj.states.push_back(x0);
    traj.reason = envs::Termination::max_steps;

    std::vector<Vector> warm(config.horizon, Vector::Zero(spec.control_dim));
    for (std::size_t k = 0; k < steps; ++k) {
        const Vector& x = traj.states.back();
        Vector u = Vector::Zero(spec.control_dim);
        double planned = std::numeric_limits<double>::quiet_NaN();
        try {
            const Plan plan = ilqr_solve(model, x, cost, config, std::span<const Vector>(warm));
            u = plan.controls.front();
            planned = plan.cost;
            for (std::size_t t = 0; t + 1 < plan.controls.size(); ++t) {
                warm[t] = plan.controls[t + 1];
            }
            warm.back() = plan.controls.back();
        } catch (const NumericalError&) {
            result.failed_steps.push_back(k);
            warm.assign(config.horizon, Vector::Zero(spec.control_dim));
        }

        envs::StepResult r = envs::step(spec, x, u);
        traj.controls.push_back(envs::clamp_control(spec, u));
        traj.states.push_back(std::move(r.x));
        result.planned_costs.push_back(planned);
        if (r.terminated) {
            traj.terminated_early = true;
            traj.reason = r.reason;
            break;
        }
        if (stop_when && stop_when(traj.states.back())) {
            result.stopped_early = true;
            break;
        }
    }
    return result;
}

}  // namespace ltvnet::control
