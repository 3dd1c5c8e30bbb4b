#include "ltvnet/harness/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "ltvnet/common/csv.hpp"
#include "ltvnet/control/cost.hpp"
#include "ltvnet/envs/dataset_io.hpp"
#include "ltvnet/harness/manifest.hpp"
#include "ltvnet/harness/svg.hpp"
#include "ltvnet/structnet/serialize.hpp"

namespace ltvnet::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kUprightHold = 100;

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw UsageError("cannot create output directory " + dir.string());
    }
}

// Config snapshot under config.* plus whatever the caller adds.
RunManifest open_manifest(const ExperimentConfig& config) {
    RunManifest m = load_manifest(config.out_dir);
    for (const auto& line : split(format_config(config), '\n')) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        m.set("config." + line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
}

std::string key_values(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

control::CostSpec cost_for(const ExperimentConfig& config, const envs::EnvSpec& spec,
                           const Vector& goal) {
    return control::diagonal_cost(config.q, config.r, config.qf, goal, spec.angle_dims);
}

control::MPCConfig mpc_for(const ExperimentConfig& config, const envs::EnvSpec& spec) {
    control::MPCConfig mpc;
    mpc.horizon = config.horizon;
    mpc.ilqr_iterations = config.iterations;
    mpc.dt = spec.dt;
    for (Eigen::Index i = 0; i < config.control_lo.size(); ++i) {
        mpc.control_bounds.push_back({config.control_lo(i), config.control_hi(i)});
    }
    return mpc;
}

bool upright(const Vector& x) {
    return std::abs(control::wrap_angle(x(2) - std::numbers::pi)) < 0.2 && std::abs(x(3)) < 1.0;
}

bool arm_at_goal(const Vector& x, const Vector& goal) {
    return std::abs(control::wrap_angle(x(0) - goal(0))) < 0.15 &&
           std::abs(control::wrap_angle(x(2) - goal(2))) < 0.15 && std::abs(x(1)) < 0.5 &&
           std::abs(x(3)) < 0.5;
}

structnet::DatasetSplit load_split(const ExperimentConfig& config, const envs::EnvSpec& spec,
                                   const fs::path& dataset) {
    const envs::Collection data = envs::read_dataset(dataset, spec.state_dim, spec.control_dim);
    return structnet::split_dataset(data.transitions, split_seed(config));
}

structnet::StructuredModel load_checked_model(const fs::path& path, const envs::EnvSpec& spec) {
    structnet::StructuredModel model = structnet::load_model(path);
    if (model.state_dim != spec.state_dim || model.control_dim != spec.control_dim) {
        throw DataError("model " + path.string() + " has dimensions (" +
                        std::to_string(model.state_dim) + "," + std::to_string(model.control_dim) +
                        ") but env " + spec.name + " needs (" + std::to_string(spec.state_dim) +
                        "," + std::to_string(spec.control_dim) + ")");
    }
    return model;
}

std::vector<double> column_values(const CsvTable& table, std::size_t col) {
    std::vector<double> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) out.push_back(parse_double(row[col]));
    return out;
}

}  // namespace

fs::path episode_file(std::size_t episode) {
    return "episode_" + std::to_string(episode) + ".csv";
}

std::uint64_t split_seed(const ExperimentConfig& config) { return derive_seed(config.seed, 1); }
std::uint64_t init_seed(const ExperimentConfig& config) { return derive_seed(config.seed, 2); }
std::uint64_t train_seed(const ExperimentConfig& config) { return derive_seed(config.seed, 3); }
std::uint64_t episode_seed(const ExperimentConfig& config, std::size_t episode) {
    return config.seed * 10000 + episode;
}

std::optional<std::size_t> success_step(const envs::EnvSpec& spec,
                                        std::span<const Vector> states, const Vector& goal) {
    std::size_t run = 0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const Vector& x = states[k];
        switch (spec.kind) {
            case envs::EnvKind::mountain_car:
                if (x(0) >= 0.45) return k;
                break;
            case envs::EnvKind::cart_pole:
                run = upright(x) ? run + 1 : 0;
                if (run >= kUprightHold) return k;
                break;
            case envs::EnvKind::two_link_arm:
                if (arm_at_goal(x, goal)) return k;
                break;
            case envs::EnvKind::linear:
                if ((x - goal).norm() < 1e-2) return k;
                break;
        }
    }
    return std::nullopt;
}

std::function<bool(const Vector&)> stop_predicate(const envs::EnvSpec& spec, const Vector& goal) {
    switch (spec.kind) {
        case envs::EnvKind::mountain_car:
            return [](const Vector& x) { return x(0) >= 0.45; };
        case envs::EnvKind::cart_pole:
            // mpc_run never shows us the initial state, which can only
            // shorten the run by one; success_step is the judge.
            return [run = std::size_t{0}](const Vector& x) mutable {
                run = upright(x) ? run + 1 : 0;
                return run >= kUprightHold;
            };
        case envs::EnvKind::two_link_arm:
            return [goal](const Vector& x) { return arm_at_goal(x, goal); };
        case envs::EnvKind::linear:
            return [goal](const Vector& x) { return (x - goal).norm() < 1e-2; };
    }
    return {};
}

CollectOutcome run_collect(const ExperimentConfig& config) {
    validate(config);
    const envs::EnvSpec spec = envs::make_env(config.env);
    ensure_dir(config.out_dir);
    const envs::Collection data =
        envs::collect(spec, config.n_traj, config.max_steps, config.seed, config.control_hold);

    CollectOutcome out;
    out.dataset = config.out_dir / kDatasetFile;
    out.rows = data.transitions.size();
    envs::write_dataset(out.dataset, data, spec.state_dim, spec.control_dim);

    RunManifest m = open_manifest(config);
    m.set("dataset.path", out.dataset.string());
    m.set("dataset.rows", std::to_string(out.rows));
    save_manifest(config.out_dir, std::move(m));
    return out;
}

TrainOutcome run_train(const ExperimentConfig& config, const fs::path& dataset) {
    validate(config);
    const envs::EnvSpec spec = envs::make_env(config.env);
    ensure_dir(config.out_dir);
    const structnet::DatasetSplit split = load_split(config, spec, dataset);

    structnet::ModelOptions model_options;
    model_options.hidden = config.hidden;
    structnet::StructuredModel model =
        structnet::make_model(spec.state_dim, spec.control_dim, init_seed(config), model_options);
    structnet::TrainOptions options;
    options.epochs = config.epochs;
    options.batch_size = config.batch_size;
    options.seed = train_seed(config);
    structnet::TrainResult result = structnet::train(std::move(model), split.train, split.val, options);

    TrainOutcome out;
    out.model = config.out_dir / kModelFile;
    out.loss_csv = config.out_dir / kLossFile;
    out.report = result.report;
    structnet::save_model(result.model, out.model);
    if (!(structnet::load_model(out.model) == result.model)) {
        throw DataError("model file " + out.model.string() + " does not round-trip");
    }

    std::string csv = "epoch,train_loss,val_loss\n";
    csv += "0," + format_double(out.report.initial_train_loss) + "," +
           format_double(out.report.initial_val_loss) + "\n";
    for (std::size_t e = 0; e < out.report.epochs_run; ++e) {
        csv += std::to_string(e + 1) + "," + format_double(out.report.train_loss[e]) + "," +
               format_double(out.report.val_loss[e]) + "\n";
    }
    write_file_atomic(out.loss_csv, csv);

    RunManifest m = open_manifest(config);
    m.set("dataset.path", dataset.string());
    m.set("dataset.rows", std::to_string(split.train.size() + split.val.size()));
    m.set("model.path", out.model.string());
    m.set("train.loss_csv.path", out.loss_csv.string());
    m.set("train.epochs_run", std::to_string(out.report.epochs_run));
    m.set("train.final_train_loss", format_double(out.report.train_loss.empty()
                                                      ? out.report.initial_train_loss
                                                      : out.report.train_loss.back()));
    m.set("train.final_val_loss", format_double(out.report.val_loss.empty()
                                                    ? out.report.initial_val_loss
                                                    : out.report.val_loss.back()));
    m.set("train.wall_seconds", format_double(out.report.wall_seconds));
    save_manifest(config.out_dir, std::move(m));
    return out;
}

std::pair<Vector, Vector> episode_setup(const ExperimentConfig& config, std::size_t episode) {
    const envs::EnvSpec spec = envs::make_env(config.env);
    std::vector<envs::Interval> box;
    for (Eigen::Index i = 0; i < config.init_lo.size(); ++i) {
        box.push_back({config.init_lo(i), config.init_hi(i)});
    }
    const std::uint64_t seed = episode_seed(config, episode);
    Rng init_rng(seed);
    Vector x0 = envs::sample_uniform(box, init_rng);

    Vector goal = config.goal;
    if (config.random_goal) {
        Rng goal_rng(derive_seed(seed, 1));
        for (Eigen::Index d : spec.angle_dims) {
            goal(d) = goal_rng.uniform(-std::numbers::pi, std::numbers::pi);
        }
    }
    return {std::move(x0), std::move(goal)};
}

std::string format_episode_csv(const Episode& ep) {
    const auto& states = ep.result.executed.states;
    const auto& controls = ep.result.executed.controls;
    const Eigen::Index n = ep.goal.size();
    const Eigen::Index m = controls.empty() ? 0 : controls.front().size();

    std::string out = "step";
    for (Eigen::Index i = 0; i < n; ++i) out += ",x_" + std::to_string(i);
    for (Eigen::Index i = 0; i < m; ++i) out += ",u_" + std::to_string(i);
    out += ",planned_cost";
    for (Eigen::Index i = 0; i < n; ++i) out += ",goal_" + std::to_string(i);
    out += '\n';

    for (std::size_t k = 0; k < states.size(); ++k) {
        out += std::to_string(k);
        for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(states[k](i));
        const bool has_u = k < controls.size();
        for (Eigen::Index i = 0; i < m; ++i) {
            out += ',' + format_double(has_u ? controls[k](i) : kNaN);
        }
        out += ',' + format_double(has_u ? ep.result.planned_costs[k] : kNaN);
        for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(ep.goal(i));
        out += '\n';
    }
    return out;
}

ControlOutcome run_control(const ExperimentConfig& config, const fs::path& model_path,
                           std::size_t episodes) {
    validate(config);
    const envs::EnvSpec spec = envs::make_env(config.env);
    const structnet::StructuredModel model = load_checked_model(model_path, spec);
    ensure_dir(config.out_dir);
    const control::MPCConfig mpc = mpc_for(config, spec);

    ControlOutcome out;
    std::vector<double> steps_to_goal;
    for (std::size_t i = 0; i < episodes; ++i) {
        Episode ep;
        ep.index = i;
        std::tie(ep.x0, ep.goal) = episode_setup(config, i);
        const control::CostSpec cost = cost_for(config, spec, ep.goal);
        ep.result = control::mpc_run(spec, model, cost, mpc, ep.x0, config.episode_steps,
                                     stop_predicate(spec, ep.goal));
        ep.steps_to_goal = success_step(spec, ep.result.executed.states, ep.goal);
        if (ep.steps_to_goal) {
            ++out.successes;
            steps_to_goal.push_back(static_cast<double>(*ep.steps_to_goal));
        }
        ep.csv = config.out_dir / episode_file(i);
        write_file_atomic(ep.csv, format_episode_csv(ep));
        out.episodes.push_back(std::move(ep));
    }
    out.median_steps_to_goal =
        steps_to_goal.empty() ? kNaN : verify::quantiles(steps_to_goal).median;

    std::vector<std::pair<std::string, std::string>> kv = {
        {"env", spec.name},
        {"episodes", std::to_string(episodes)},
        {"successes", std::to_string(out.successes)},
        {"median_steps_to_goal", format_double(out.median_steps_to_goal)},
    };
    for (const auto& ep : out.episodes) {
        const std::string p = "episode_" + std::to_string(ep.index) + ".";
        kv.emplace_back(p + "success", ep.steps_to_goal ? "true" : "false");
        kv.emplace_back(p + "steps_to_goal",
                        ep.steps_to_goal ? std::to_string(*ep.steps_to_goal) : "nan");
        kv.emplace_back(p + "steps", std::to_string(ep.result.executed.controls.size()));
        kv.emplace_back(p + "termination", ep.result.stopped_early
                                                ? std::string("goal_reached")
                                                : std::string(envs::to_string(ep.result.executed.reason)));
        kv.emplace_back(p + "failed_plans", std::to_string(ep.result.failed_steps.size()));
    }
    out.summary = config.out_dir / kControlSummaryFile;
    write_file_atomic(out.summary, key_values(kv));

    RunManifest m = open_manifest(config);
    m.set("model.path", model_path.string());
    m.set("control.summary.path", out.summary.string());
    m.set("control.episodes", std::to_string(episodes));
    m.set("control.successes", std::to_string(out.successes));
    m.set("control.success", episodes > 0 && out.successes == episodes ? "true" : "false");
    m.set("control.median_steps_to_goal", format_double(out.median_steps_to_goal));
    save_manifest(config.out_dir, std::move(m));
    return out;
}

VerifyOutcome run_verify(const ExperimentConfig& config, const fs::path& model_path,
                         const fs::path& dataset) {
    validate(config);
    const envs::EnvSpec spec = envs::make_env(config.env);
    if (!fs::exists(model_path)) throw DataError("missing model " + model_path.string());
    const structnet::StructuredModel model = load_checked_model(model_path, spec);
    ensure_dir(config.out_dir);
    const structnet::DatasetSplit split = load_split(config, spec, dataset);
    if (split.val.empty()) throw DataError("dataset " + dataset.string() + " has no validation rows");

    std::vector<verify::EvalPoint> points;
    for (std::size_t i = 0; i < std::min(config.verify_points, split.val.size()); ++i) {
        points.emplace_back(split.val[i].x, split.val[i].u);
    }
    verify::FidelityOptions options;
    options.directions = config.verify_directions;
    options.seed = derive_seed(config.seed, 4);
    options.env = &spec;

    VerifyOutcome out;
    out.fidelity = verify::jacobian_fidelity(model, points, options);
    out.rollouts = verify::model_fidelity(model, spec, config.verify_rollouts,
                                          std::max<std::size_t>(config.verify_horizon, 1),
                                          derive_seed(config.seed, 5));
    const std::size_t audit_n = std::min(config.audit_samples, split.val.size());
    out.audit_error = verify::gradient_audit(
        model, std::span<const structnet::Transition>(split.val.data(), audit_n));

    const fs::path fidelity_csv = config.out_dir / kFidelityFile;
    const fs::path rollout_csv = config.out_dir / kModelFidelityFile;
    write_file_atomic(fidelity_csv, verify::format_fidelity_csv(out.fidelity));
    write_file_atomic(rollout_csv, verify::format_model_fidelity_csv(out.rollouts));

    const auto q = [](std::vector<std::pair<std::string, std::string>>& kv, const std::string& name,
                      const verify::Quantiles& v) {
        kv.emplace_back(name + "_min", format_double(v.min));
        kv.emplace_back(name + "_median", format_double(v.median));
        kv.emplace_back(name + "_max", format_double(v.max));
    };
    std::vector<std::pair<std::string, std::string>> kv = {
        {"env", spec.name},
        {"points", std::to_string(points.size())},
        {"directions", std::to_string(config.verify_directions)},
    };
    q(kv, "cosine", out.fidelity.cosine);
    q(kv, "relative_error", out.fidelity.relative_error);
    q(kv, "sign_agreement", out.fidelity.sign_agreement);
    q(kv, "env_cosine", out.fidelity.env_cosine);
    kv.emplace_back("rollouts", std::to_string(config.verify_rollouts));
    kv.emplace_back("rollouts_truncated", std::to_string(out.rollouts.truncated));
    kv.emplace_back("rollout_error_final", format_double(out.rollouts.mean_error.back()));
    kv.emplace_back("gradient_audit_samples", std::to_string(audit_n));
    kv.emplace_back("gradient_audit_max_rel_error", format_double(out.audit_error));
    out.summary = config.out_dir / kVerifySummaryFile;
    write_file_atomic(out.summary, key_values(kv));

    RunManifest m = open_manifest(config);
    m.set("model.path", model_path.string());
    m.set("verify.fidelity.path", fidelity_csv.string());
    m.set("verify.model_fidelity.path", rollout_csv.string());
    m.set("verify.summary.path", out.summary.string());
    m.set("verify.sign_agreement_median", format_double(out.fidelity.sign_agreement.median));
    m.set("verify.gradient_audit_max_rel_error", format_double(out.audit_error));
    save_manifest(config.out_dir, std::move(m));
    return out;
}

ReportOutcome run_report(const fs::path& run_dir) {
    if (!fs::is_directory(run_dir)) throw DataError("no run directory " + run_dir.string());
    std::vector<fs::path> episodes;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.starts_with("episode_") && name.ends_with(".csv")) episodes.push_back(entry.path());
    }
    std::sort(episodes.begin(), episodes.end());
    const fs::path loss = run_dir / kLossFile;
    if (episodes.empty() && !fs::exists(loss)) {
        throw DataError("nothing to report in " + run_dir.string() +
                        " (no episode_*.csv or loss.csv)");
    }

    ReportOutcome out;
    const auto readable = [&](const fs::path& p) -> std::optional<CsvTable> {
        if (fs::file_size(p) == 0) {
            out.warnings.push_back("skipping empty " + p.string());
            return std::nullopt;
        }
        CsvTable t = read_csv(p);
        if (t.rows.empty()) {
            out.warnings.push_back("skipping " + p.string() + " (no rows)");
            return std::nullopt;
        }
        return t;
    };

    for (const auto& path : episodes) {
        const auto table = readable(path);
        if (!table) continue;
        LinePlot plot;
        plot.title = path.stem().string();
        plot.x_label = "step";
        plot.y_label = "state";
        const auto steps = column_values(*table, table->column("step"));
        for (std::size_t i = 0;; ++i) {
            const std::string x_col = "x_" + std::to_string(i);
            if (std::find(table->header.begin(), table->header.end(), x_col) ==
                table->header.end()) {
                break;
            }
            plot.series.push_back({x_col, steps, column_values(*table, table->column(x_col))});
            const std::string g_col = "goal_" + std::to_string(i);
            if (std::find(table->header.begin(), table->header.end(), g_col) !=
                table->header.end()) {
                plot.references.push_back(
                    {parse_double(table->rows.front()[table->column(g_col)]), i});
            }
        }
        fs::path svg = path;
        svg.replace_extension(".svg");
        write_file_atomic(svg, render_svg(plot));
        out.written.push_back(svg);
    }

    if (fs::exists(loss)) {
        if (const auto table = readable(loss)) {
            LinePlot plot;
            plot.title = "training loss";
            plot.x_label = "epoch";
            plot.y_label = "loss per sample";
            plot.log_y = true;
            const auto epochs = column_values(*table, table->column("epoch"));
            plot.series.push_back({"train", epochs, column_values(*table, table->column("train_loss"))});
            plot.series.push_back({"validation", epochs, column_values(*table, table->column("val_loss"))});
            const fs::path svg = run_dir / "loss.svg";
            write_file_atomic(svg, render_svg(plot));
            out.written.push_back(svg);
        }
    }
    return out;
}

}  // namespace ltvnet::harness
