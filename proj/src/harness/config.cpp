#include "ltvnet/harness/config.hpp"

#include <functional>
#include <map>

#include "ltvnet/common/csv.hpp"

namespace ltvnet::harness {

namespace {

Vector make_vector(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

std::size_t to_count(std::string_view text) {
    const long long v = parse_integer(text);
    if (v < 0) throw DataError("negative count '" + std::string(text) + "'");
    return static_cast<std::size_t>(v);
}

Vector to_vector(std::string_view text) {
    const auto fields = split(text, ',');
    Vector v(static_cast<Eigen::Index>(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = parse_double(fields[i]);
    }
    return v;
}

std::vector<Eigen::Index> to_sizes(std::string_view text) {
    std::vector<Eigen::Index> sizes;
    for (const auto& f : split(text, ',')) {
        const long long v = parse_integer(f);
        if (v <= 0) throw DataError("layer size must be positive");
        sizes.push_back(static_cast<Eigen::Index>(v));
    }
    return sizes;
}

bool to_bool(std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw DataError("not a boolean: '" + std::string(text) + "'");
}

std::string join(const Vector& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v(i));
    }
    return out;
}

std::string join(const std::vector<Eigen::Index>& sizes) {
    std::string out;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(sizes[i]);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

// Every key except env and seed, which parse_config handles first.
const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"out", [](auto& c, auto v) { c.out_dir = std::string(trim(v)); }},
        {"collect.n_traj", [](auto& c, auto v) { c.n_traj = to_count(v); }},
        {"collect.max_steps", [](auto& c, auto v) { c.max_steps = to_count(v); }},
        {"collect.control_hold", [](auto& c, auto v) { c.control_hold = to_count(v); }},
        {"train.epochs", [](auto& c, auto v) { c.epochs = to_count(v); }},
        {"train.batch_size", [](auto& c, auto v) { c.batch_size = to_count(v); }},
        {"train.hidden", [](auto& c, auto v) { c.hidden = to_sizes(v); }},
        {"cost.q", [](auto& c, auto v) { c.q = to_vector(v); }},
        {"cost.r", [](auto& c, auto v) { c.r = to_vector(v); }},
        {"cost.qf", [](auto& c, auto v) { c.qf = to_vector(v); }},
        {"cost.goal", [](auto& c, auto v) { c.goal = to_vector(v); }},
        {"mpc.horizon", [](auto& c, auto v) { c.horizon = to_count(v); }},
        {"mpc.iterations", [](auto& c, auto v) { c.iterations = to_count(v); }},
        {"mpc.control_lo", [](auto& c, auto v) { c.control_lo = to_vector(v); }},
        {"mpc.control_hi", [](auto& c, auto v) { c.control_hi = to_vector(v); }},
        {"control.episodes", [](auto& c, auto v) { c.episodes = to_count(v); }},
        {"control.steps", [](auto& c, auto v) { c.episode_steps = to_count(v); }},
        {"control.random_goal", [](auto& c, auto v) { c.random_goal = to_bool(v); }},
        {"control.init_lo", [](auto& c, auto v) { c.init_lo = to_vector(v); }},
        {"control.init_hi", [](auto& c, auto v) { c.init_hi = to_vector(v); }},
        {"verify.points", [](auto& c, auto v) { c.verify_points = to_count(v); }},
        {"verify.directions", [](auto& c, auto v) { c.verify_directions = to_count(v); }},
        {"verify.rollouts", [](auto& c, auto v) { c.verify_rollouts = to_count(v); }},
        {"verify.horizon", [](auto& c, auto v) { c.verify_horizon = to_count(v); }},
        {"verify.audit_samples", [](auto& c, auto v) { c.audit_samples = to_count(v); }},
    };
    return table;
}

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line);
}

}  // namespace

ExperimentConfig default_config(std::string_view env) {
    const envs::EnvSpec spec = envs::make_env(env);
    ExperimentConfig c;
    c.env = spec.name;
    c.goal = spec.goal;
    c.control_lo.resize(spec.control_dim);
    c.control_hi.resize(spec.control_dim);
    for (Eigen::Index i = 0; i < spec.control_dim; ++i) {
        c.control_lo(i) = spec.control_bounds[static_cast<std::size_t>(i)].lo;
        c.control_hi(i) = spec.control_bounds[static_cast<std::size_t>(i)].hi;
    }
    c.init_lo.resize(spec.state_dim);
    c.init_hi.resize(spec.state_dim);
    for (Eigen::Index i = 0; i < spec.state_dim; ++i) {
        c.init_lo(i) = spec.init_ranges[static_cast<std::size_t>(i)].lo;
        c.init_hi(i) = spec.init_ranges[static_cast<std::size_t>(i)].hi;
    }

    switch (spec.kind) {
        case envs::EnvKind::mountain_car:
            c.q = make_vector({0.0, 0.0});
            c.r = make_vector({1e-4});
            c.qf = make_vector({1000.0, 100.0});
            c.horizon = 50;
            c.episode_steps = 300;
            break;
        case envs::EnvKind::cart_pole:
            c.q = make_vector({1.0, 0.1, 10.0, 0.1});
            c.r = make_vector({1e-3});
            c.qf = make_vector({10.0, 1.0, 100.0, 1.0});
            c.horizon = 60;
            c.episode_steps = 300;
            break;
        case envs::EnvKind::two_link_arm:
            c.q = make_vector({10.0, 0.1, 10.0, 0.1});
            c.r = make_vector({1e-3, 1e-3});
            c.qf = make_vector({100.0, 1.0, 100.0, 1.0});
            c.horizon = 40;
            c.episode_steps = 400;
            c.random_goal = true;
            break;
        case envs::EnvKind::linear:
            break;
    }
    return c;
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
    struct Entry {
        std::string key;
        std::string value;
        std::size_t line;
    };
    std::vector<Entry> entries;
    std::map<std::string, std::size_t, std::less<>> seen;

    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError(where(source, line_no) + ": expected key=value");
        }
        std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw UsageError(where(source, line_no) + ": empty key");
        if (seen.contains(key)) {
            throw UsageError(where(source, line_no) + ": duplicate key '" + key + "'");
        }
        if (key != "env" && key != "seed" && !setters().contains(key)) {
            throw UsageError(where(source, line_no) + ": unknown key '" + key + "'");
        }
        seen.emplace(key, line_no);
        entries.push_back({std::move(key), std::string(trim(line.substr(eq + 1))), line_no});
    }

    const auto find = [&](std::string_view key) -> const Entry* {
        for (const auto& e : entries) {
            if (e.key == key) return &e;
        }
        return nullptr;
    };
    const Entry* env = find("env");
    if (!env) throw UsageError(std::string(source) + ": missing required key 'env'");
    const Entry* seed = find("seed");
    if (!seed) throw UsageError(std::string(source) + ": missing required key 'seed'");

    ExperimentConfig config = default_config(env->value);
    try {
        const long long s = parse_integer(seed->value);
        if (s < 0) throw DataError("seed must be non-negative");
        config.seed = static_cast<std::uint64_t>(s);
    } catch (const DataError& e) {
        throw UsageError(where(source, seed->line) + ": seed: " + e.what());
    }
    for (const auto& e : entries) {
        if (e.key == "env" || e.key == "seed") continue;
        try {
            setters().find(e.key)->second(config, e.value);
        } catch (const DataError& err) {
            throw UsageError(where(source, e.line) + ": " + e.key + ": " + err.what());
        }
    }
    validate(config);
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const DataError&) {
        throw UsageError("cannot read config " + path.string());
    }
    return parse_config(text, path.string());
}

std::string format_config(const ExperimentConfig& c) {
    std::string out;
    const auto put = [&](std::string_view key, const std::string& value) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    };
    put("env", c.env);
    put("seed", std::to_string(c.seed));
    put("out", c.out_dir.string());
    put("collect.n_traj", std::to_string(c.n_traj));
    put("collect.max_steps", std::to_string(c.max_steps));
    put("collect.control_hold", std::to_string(c.control_hold));
    put("train.epochs", std::to_string(c.epochs));
    put("train.batch_size", std::to_string(c.batch_size));
    put("train.hidden", join(c.hidden));
    put("cost.q", join(c.q));
    put("cost.r", join(c.r));
    put("cost.qf", join(c.qf));
    put("cost.goal", join(c.goal));
    put("mpc.horizon", std::to_string(c.horizon));
    put("mpc.iterations", std::to_string(c.iterations));
    put("mpc.control_lo", join(c.control_lo));
    put("mpc.control_hi", join(c.control_hi));
    put("control.episodes", std::to_string(c.episodes));
    put("control.steps", std::to_string(c.episode_steps));
    put("control.random_goal", c.random_goal ? "true" : "false");
    put("control.init_lo", join(c.init_lo));
    put("control.init_hi", join(c.init_hi));
    put("verify.points", std::to_string(c.verify_points));
    put("verify.directions", std::to_string(c.verify_directions));
    put("verify.rollouts", std::to_string(c.verify_rollouts));
    put("verify.horizon", std::to_string(c.verify_horizon));
    put("verify.audit_samples", std::to_string(c.audit_samples));
    return out;
}

void validate(const ExperimentConfig& c) {
    const envs::EnvSpec spec = envs::make_env(c.env);
    const Eigen::Index n = spec.state_dim;
    const Eigen::Index m = spec.control_dim;
    const auto check = [](bool ok, const std::string& what) {
        if (!ok) throw UsageError("config: " + what);
    };
    check(c.q.size() == n && c.qf.size() == n && c.goal.size() == n,
          "cost.q, cost.qf and cost.goal need " + std::to_string(n) + " entries for " + c.env);
    check(c.r.size() == m, "cost.r needs " + std::to_string(m) + " entries for " + c.env);
    check(c.control_lo.size() == m && c.control_hi.size() == m,
          "mpc.control_lo/hi need " + std::to_string(m) + " entries for " + c.env);
    check(c.init_lo.size() == n && c.init_hi.size() == n,
          "control.init_lo/hi need " + std::to_string(n) + " entries for " + c.env);
    check((c.control_lo.array() <= c.control_hi.array()).all(), "mpc.control_lo > control_hi");
    check((c.init_lo.array() <= c.init_hi.array()).all(), "control.init_lo > init_hi");
    check((c.q.array() >= 0).all() && (c.qf.array() >= 0).all(), "cost.q and cost.qf must be >= 0");
    check((c.r.array() > 0).all(), "cost.r must be > 0");
    check(!c.hidden.empty(), "train.hidden needs at least one layer");
    check(c.batch_size > 0, "train.batch_size must be positive");
    check(c.n_traj > 0 && c.max_steps > 0, "collect.n_traj and collect.max_steps must be positive");
    check(c.control_hold > 0, "collect.control_hold must be positive");
    check(c.horizon > 0, "mpc.horizon must be positive");
    check(c.episode_steps > 0, "control.steps must be positive");
}

}  // namespace ltvnet::harness
