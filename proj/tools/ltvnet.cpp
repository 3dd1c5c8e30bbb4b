// ltvnet command-line front end.
//
//   ltvnet <collect|train|control|verify|report> --config <path>
//          [--out <dir>] [--model <path>] [--episodes <n>]

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ltvnet/common.hpp"
#include "ltvnet/common/csv.hpp"
#include "ltvnet/harness/config.hpp"
#include "ltvnet/harness/manifest.hpp"
#include "ltvnet/harness/pipeline.hpp"

namespace {

using namespace ltvnet;
namespace fs = std::filesystem;

enum Exit { ok = 0, usage = 1, data = 2, numerical = 3 };

int fail(Exit code, const char* kind, std::string message) {
    for (char& c : message) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    std::cerr << "ltvnet: " << kind << " error: " << message << "\n";
    return code;
}

struct Args {
    std::string config;
    std::string out;
    std::string model;
    std::optional<std::size_t> episodes;
};

harness::ExperimentConfig load(const Args& args) {
    if (args.config.empty()) throw UsageError("--config is required");
    harness::ExperimentConfig config = harness::load_config(args.config);
    if (!args.out.empty()) config.out_dir = args.out;
    return config;
}

fs::path model_path(const Args& args, const harness::ExperimentConfig& config) {
    return args.model.empty() ? config.out_dir / harness::kModelFile : fs::path(args.model);
}

int run(const std::string& command, const Args& args) {
    if (command == "collect") {
        const auto config = load(args);
        const auto out = harness::run_collect(config);
        std::cout << "collect: " << out.rows << " rows -> " << out.dataset.string() << "\n";
    } else if (command == "train") {
        const auto config = load(args);
        const auto out = harness::run_train(config, config.out_dir / harness::kDatasetFile);
        const auto& r = out.report;
        std::cout << "train: " << r.epochs_run << " epochs, val loss "
                  << format_double(r.initial_val_loss) << " -> "
                  << format_double(r.val_loss.empty() ? r.initial_val_loss : r.val_loss.back())
                  << ", model -> " << out.model.string() << "\n";
    } else if (command == "control") {
        const auto config = load(args);
        const std::size_t n = args.episodes.value_or(config.episodes);
        const auto out = harness::run_control(config, model_path(args, config), n);
        std::cout << "control: " << out.successes << "/" << n << " successful, median steps to goal "
                  << format_double(out.median_steps_to_goal) << "\n";
    } else if (command == "verify") {
        const auto config = load(args);
        const auto out = harness::run_verify(config, model_path(args, config),
                                             config.out_dir / harness::kDatasetFile);
        std::cout << "verify: sign agreement median " << format_double(out.fidelity.sign_agreement.median)
                  << ", cosine median " << format_double(out.fidelity.cosine.median)
                  << ", gradient audit " << format_double(out.audit_error) << "\n";
    } else if (command == "report") {
        fs::path dir = args.out;
        if (dir.empty()) dir = load(args).out_dir;
        const auto out = harness::run_report(dir);
        for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << "report: " << out.written.size() << " plots written to " << dir.string() << "\n";
    }
    return Exit::ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured linear-time-varying dynamics models with iLQR control"};
    app.require_subcommand(1);
    Args args;
    std::string command;
    for (const char* name : {"collect", "train", "control", "verify", "report"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config, "experiment config (key=value)");
        sub->add_option("--out", args.out, "output directory (overrides config 'out')");
        if (std::string(name) == "control" || std::string(name) == "verify") {
            sub->add_option("--model", args.model, "model file (default <out>/model.txt)");
        }
        if (std::string(name) == "control") {
            sub->add_option("--episodes", args.episodes, "episode count (default control.episodes)");
        }
        sub->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(Exit::usage, "usage", e.what());
    }

    try {
        return run(command, args);
    } catch (const UsageError& e) {
        return fail(Exit::usage, "usage", e.what());
    } catch (const DataError& e) {
        return fail(Exit::data, "data", e.what());
    } catch (const NumericalError& e) {
        return fail(Exit::numerical, "numerical", e.what());
    } catch (const std::exception& e) {
        return fail(Exit::data, "data", e.what());
    }
}
