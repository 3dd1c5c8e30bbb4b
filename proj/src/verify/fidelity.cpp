#include "ltvnet/verify/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltvnet/common/csv.hpp"
#include "ltvnet/diffcore/grad_check.hpp"

namespace ltvnet::verify {

using structnet::StructuredModel;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double cosine(const Matrix& a, const Matrix& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 && nb == 0.0) return 1.0;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(a.cwiseProduct(b).sum() / (na * nb), -1.0, 1.0);
}

double relative_error(const Matrix& predicted, const Matrix& reference) {
    const double denom = reference.norm();
    const double diff = (predicted - reference).norm();
    return denom > 0.0 ? diff / denom : diff;
}

Matrix stacked(const structnet::Linearization& lin) {
    Matrix j(lin.a.rows(), lin.a.cols() + lin.b.cols());
    j << lin.a, lin.b;
    return j;
}

}  // namespace

Quantiles quantiles(std::vector<double> values) {
    Quantiles q;
    if (values.empty()) {
        q.min = q.median = q.max = kNaN;
        return q;
    }
    std::sort(values.begin(), values.end());
    q.min = values.front();
    q.max = values.back();
    const std::size_t n = values.size();
    q.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    return q;
}

Matrix reference_jacobian(const StructuredModel& model, const Vector& x, const Vector& u,
                          double step) {
    const Eigen::Index n = model.state_dim;
    const Eigen::Index m = model.control_dim;
    Matrix j(n, n + m);
    for (Eigen::Index c = 0; c < n; ++c) {
        Vector up = x, down = x;
        up(c) += step;
        down(c) -= step;
        j.col(c) = (structnet::forward(model, up, u) - structnet::forward(model, down, u)) /
                   (2.0 * step);
    }
    for (Eigen::Index c = 0; c < m; ++c) {
        Vector up = u, down = u;
        up(c) += step;
        down(c) -= step;
        j.col(n + c) = (structnet::forward(model, x, up) - structnet::forward(model, x, down)) /
                       (2.0 * step);
    }
    return j;
}

FidelityReport jacobian_fidelity(const StructuredModel& model, std::span<const EvalPoint> points,
                                 const FidelityOptions& options) {
    if (points.empty()) throw UsageError("jacobian_fidelity needs at least one point");
    const Eigen::Index dim = model.state_dim + model.control_dim;
    Rng rng(options.seed);

    FidelityReport report;
    std::vector<double> cosines, errors, agreements, env_cosines;
    for (const auto& [x, u] : points) {
        const Matrix predicted = stacked(structnet::linearize(model, x, u));
        const Matrix reference = reference_jacobian(model, x, u, options.fd_step);

        FidelitySample s;
        s.x = x;
        s.u = u;
        s.cosine = cosine(predicted, reference);
        s.relative_error = relative_error(predicted, reference);

        std::size_t agree = 0;
        for (std::size_t d = 0; d < options.directions; ++d) {
            Vector dir(dim);
            for (Eigen::Index i = 0; i < dim; ++i) dir(i) = rng.normal();
            dir.normalize();
            if ((predicted * dir).dot(reference * dir) > 0.0) ++agree;
        }
        s.sign_agreement = options.directions
                               ? static_cast<double>(agree) / static_cast<double>(options.directions)
                               : kNaN;

        if (options.env) {
            const Matrix truth = stacked(envs::true_linearization(*options.env, x, u));
            s.env_cosine = cosine(predicted, truth);
            s.env_relative_error = relative_error(predicted, truth);
            env_cosines.push_back(s.env_cosine);
        } else {
            s.env_cosine = kNaN;
            s.env_relative_error = kNaN;
        }

        cosines.push_back(s.cosine);
        errors.push_back(s.relative_error);
        agreements.push_back(s.sign_agreement);
        report.samples.push_back(std::move(s));
    }
    report.cosine = quantiles(cosines);
    report.relative_error = quantiles(errors);
    report.sign_agreement = quantiles(agreements);
    report.env_cosine = quantiles(env_cosines);
    return report;
}

std::vector<RolloutInput> sample_rollout_inputs(const envs::EnvSpec& spec, std::size_t n_rollouts,
                                                std::size_t horizon, std::uint64_t seed) {
    std::vector<RolloutInput> inputs;
    for (std::size_t r = 0; r < n_rollouts; ++r) {
        RolloutInput in;
        in.x0 = envs::reset(spec, derive_seed(seed, 2 * r));
        Rng rng(derive_seed(seed, 2 * r + 1));
        for (std::size_t k = 0; k < horizon; ++k) {
            in.controls.push_back(envs::sample_uniform(spec.control_bounds, rng));
        }
        inputs.push_back(std::move(in));
    }
    return inputs;
}

ModelFidelity model_fidelity(const StructuredModel& model, const envs::EnvSpec& spec,
                             std::span<const RolloutInput> inputs) {
    std::size_t horizon = 0;
    for (const auto& in : inputs) horizon = std::max(horizon, in.controls.size());
    if (horizon == 0) throw UsageError("model_fidelity needs a horizon of at least 1");

    ModelFidelity out;
    std::vector<double> sums(horizon, 0.0);
    out.counts.assign(horizon, 0);
    for (const auto& in : inputs) {
        const auto predicted = structnet::predict_rollout(model, in.x0, in.controls, spec.dt);
        Vector x = in.x0;
        bool cut = predicted.diverged;
        for (std::size_t k = 0; k < in.controls.size(); ++k) {
            if (k + 1 >= predicted.states.size()) {
                cut = true;
                break;
            }
            envs::StepResult r;
            try {
                r = envs::step(spec, x, in.controls[k]);
            } catch (const NumericalError&) {
                cut = true;
                break;
            }
            x = r.x;
            sums[k] += (x - predicted.states[k + 1]).norm();
            ++out.counts[k];
            if (r.terminated && k + 1 < in.controls.size()) {
                cut = true;
                break;
            }
        }
        if (cut) ++out.truncated;
    }
    out.mean_error.resize(horizon);
    for (std::size_t k = 0; k < horizon; ++k) {
        out.mean_error[k] = out.counts[k] ? sums[k] / static_cast<double>(out.counts[k]) : kNaN;
    }
    return out;
}

ModelFidelity model_fidelity(const StructuredModel& model, const envs::EnvSpec& spec,
                             std::size_t n_rollouts, std::size_t horizon, std::uint64_t seed) {
    if (horizon == 0) throw UsageError("model_fidelity needs a horizon of at least 1");
    const auto inputs = sample_rollout_inputs(spec, n_rollouts, horizon, seed);
    return model_fidelity(model, spec, inputs);
}

double gradient_audit(const StructuredModel& model, std::span<const structnet::Transition> sample,
                      double step) {
    if (sample.empty()) throw UsageError("gradient_audit needs a non-empty sample");
    const Eigen::Index a_count = static_cast<Eigen::Index>(model.a_net.parameter_count());
    const Eigen::Index b_count = static_cast<Eigen::Index>(model.b_net.parameter_count());

    Vector point(a_count + b_count);
    point << diffcore::flatten(model.a_net), diffcore::flatten(model.b_net);

    const diffcore::GradientFunction loss = [&](const Vector& theta, Vector* gradient) {
        StructuredModel probe = model;
        probe.a_net = diffcore::unflatten(model.a_net, theta.head(a_count));
        probe.b_net = diffcore::unflatten(model.b_net, theta.tail(b_count));
        const auto lg = structnet::loss_and_gradient(probe, sample);
        if (gradient) {
            gradient->resize(a_count + b_count);
            *gradient << diffcore::flatten(lg.a_grad), diffcore::flatten(lg.b_grad);
        }
        return lg.loss;
    };
    return diffcore::grad_check(loss, point, step);
}

std::string format_fidelity_csv(const FidelityReport& report) {
    std::string out;
    if (report.samples.empty()) return "sample,cosine,relative_error,sign_agreement\n";
    const Eigen::Index n = report.samples.front().x.size();
    const Eigen::Index m = report.samples.front().u.size();
    out = "sample";
    for (Eigen::Index i = 0; i < n; ++i) out += ",x_" + std::to_string(i);
    for (Eigen::Index i = 0; i < m; ++i) out += ",u_" + std::to_string(i);
    out += ",cosine,relative_error,sign_agreement,env_cosine,env_relative_error\n";
    for (std::size_t s = 0; s < report.samples.size(); ++s) {
        const auto& smp = report.samples[s];
        out += std::to_string(s);
        for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(smp.x(i));
        for (Eigen::Index i = 0; i < m; ++i) out += ',' + format_double(smp.u(i));
        out += ',' + format_double(smp.cosine);
        out += ',' + format_double(smp.relative_error);
        out += ',' + format_double(smp.sign_agreement);
        out += ',' + format_double(smp.env_cosine);
        out += ',' + format_double(smp.env_relative_error);
        out += '\n';
    }
    return out;
}

std::string format_model_fidelity_csv(const ModelFidelity& fidelity) {
    std::string out = "step,mean_error,count\n";
    for (std::size_t k = 0; k < fidelity.mean_error.size(); ++k) {
        out += std::to_string(k + 1) + ',' + format_double(fidelity.mean_error[k]) + ',' +
               std::to_string(fidelity.counts[k]) + '\n';
    }
    return out;
}

}  // namespace ltvnet::verify
