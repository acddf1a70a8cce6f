// invnet: train sparse networks with invariant natural-gradient methods,
// audit their invariance properties, and dump metric blocks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "invnet/audit.hpp"
#include "invnet/experiment.hpp"
#include "invnet/metrics.hpp"
#include "invnet/netspec.hpp"

namespace fs = std::filesystem;
using namespace invnet;

namespace {

struct RunOptions {
    std::string method = "backprop";
    std::string activation = "sigmoid";
    std::string interpretation = "bernoulli";
    std::size_t iters = 0;
    std::size_t runs = 20;
    std::uint64_t seed = 1;
    double epsilon = 1e-4;
    double lr0 = 0.01;
    double gamma = 0.01;
    std::size_t mc_samples = 1;
    std::string net = "autoencoder";
    std::string out;
    std::string mode = "batch";
    bool no_clock = false;
};

struct AuditOptions {
    std::uint64_t seed = 1;
    double eta = 0.5;
    bool no_autoencoder = false;
    bool full = false;
    std::string out;
};

struct DumpOptions {
    std::string metric = "fisher";
    std::string activation = "sigmoid";
    std::string interpretation = "bernoulli";
    std::string net = "autoencoder";
    std::uint64_t seed = 1;
    std::size_t mc_samples = 1;
    std::size_t samples = 16;
    bool qd = false;
    std::string out;
};

Network load_or_generate(const std::string& spec, std::uint64_t seed, ActivationKind act, Interpretation interp) {
    if (spec == "autoencoder") return Network(generate_autoencoder(seed), act, interp);
    const Network loaded = load_network_spec(spec);
    return Network(loaded.topology(), act, interp);
}

int run_command(const RunOptions& o) {
    ExperimentConfig config;
    config.optimizer.kind = parse_optimizer(o.method);
    config.optimizer.lr0 = o.lr0;
    config.optimizer.epsilon = o.epsilon;
    config.optimizer.gamma = o.gamma;
    config.optimizer.mc_samples = o.mc_samples;
    config.optimizer.seed = o.seed;
    config.activation = parse_activation(o.activation);
    config.interpretation = parse_interpretation(o.interpretation);
    if (o.iters > 0) config.iterations = o.iters;
    config.runs = o.runs;
    if (o.net != "autoencoder") config.network_spec = o.net;
    config.record_clock = !o.no_clock;
    config.online = o.mode == "online";

    const ExperimentResult result = run_experiment(config);
    const std::string summary = summary_json(config, result.summary, result.runs);
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        for (const RunRecord& rec : result.runs) {
            char name[32];
            std::snprintf(name, sizeof name, "run_%03zu.csv", rec.run);
            std::ofstream csv(fs::path(o.out) / name);
            write_run_csv(csv, rec);
        }
        std::ofstream(fs::path(o.out) / "summary.json") << summary << '\n';
    }
    std::cout << summary << '\n';
    return result.summary.aborted == result.summary.runs ? 1 : 0;
}

int audit_command(const AuditOptions& o) {
    AuditConfig config;
    config.seed = o.seed;
    config.eta = o.eta;
    config.include_autoencoder = !o.no_autoencoder;
    const AuditReport report = audit_invariance(config);
    AuditReport shown;
    shown.entries = o.full ? report.entries : report.summary();
    const std::string text = format_report(shown);
    std::cout << text;
    if (!o.out.empty()) std::ofstream(o.out) << format_report(report);
    const bool failed = report.hard_failure();
    std::cout << (failed ? "audit: FAILED\n" : "audit: ok\n");
    return failed ? 1 : 0;
}

int dump_command(const DumpOptions& o) {
    const ActivationKind act = parse_activation(o.activation);
    const Interpretation interp = parse_interpretation(o.interpretation);
    const Network net = load_or_generate(o.net, o.seed, act, interp);
    const Dataset data = encode_inputs(generate_task_dataset(net.topology(), interp, o.seed + 1, o.samples), act);
    const ParameterSet params = initialize_params(net.topology(), act, o.seed + 2);
    const BlockShape shape = o.qd ? BlockShape::quasi_diagonal : BlockShape::full;

    std::ofstream file;
    if (!o.out.empty()) file.open(o.out);
    std::ostream& out = o.out.empty() ? std::cout : file;
    if (o.metric == "full") {
        dump_matrix(out, "full fisher", full_fisher(net, params, data));
    } else if (o.metric == "fisher") {
        dump_blocks(out, unitwise_fisher(net, params, data, shape));
    } else if (o.metric == "backpropagated") {
        dump_blocks(out, backpropagated_metric(net, params, data, shape));
    } else if (o.metric == "op") {
        dump_blocks(out, op_metric(net, params, data, shape));
    } else if (o.metric == "monte_carlo") {
        dump_blocks(out, monte_carlo_fisher(net, params, data, o.mc_samples, o.seed, shape));
    } else {
        throw CLI::ValidationError("--metric", "unknown metric '" + o.metric + "'");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Invariant natural-gradient training for sparse feedforward networks"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Train and report final losses");
    run_cmd->add_option("--method", run.method, "Optimizer")
        ->check(CLI::IsMember({"backprop", "unitwise_natural", "qd_natural", "backpropagated_metric",
                               "qd_backpropagated_metric", "unitwise_op", "mc_unitwise_natural", "mc_qd_natural",
                               "diagonal_gauss_newton", "adagrad"}));
    run_cmd->add_option("--activation", run.activation)->check(CLI::IsMember({"sigmoid", "tanh"}));
    run_cmd->add_option("--interpretation", run.interpretation)
        ->check(CLI::IsMember({"bernoulli", "square_loss", "square", "softmax", "spherical"}));
    run_cmd->add_option("--iters", run.iters, "Iteration budget (default: per-method)");
    run_cmd->add_option("--runs", run.runs)->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", run.seed);
    run_cmd->add_option("--epsilon", run.epsilon)->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--lr0", run.lr0)->check(CLI::PositiveNumber);
    run_cmd->add_option("--gamma", run.gamma, "Online discount")->check(CLI::Range(0.0, 0.999999));
    run_cmd->add_option("--mc-samples", run.mc_samples)->check(CLI::PositiveNumber);
    run_cmd->add_option("--net", run.net, "Network spec file or 'autoencoder'");
    run_cmd->add_option("--out", run.out, "Output directory for per-run CSV and summary.json");
    run_cmd->add_option("--mode", run.mode)->check(CLI::IsMember({"batch", "online"}));
    run_cmd->add_flag("--no-clock", run.no_clock, "Write 0 for elapsed time (byte-reproducible output)");

    AuditOptions audit;
    auto* audit_cmd = app.add_subcommand("audit", "Check invariance properties of every optimizer");
    audit_cmd->add_option("--seed", audit.seed);
    audit_cmd->add_option("--eta", audit.eta)->check(CLI::PositiveNumber);
    audit_cmd->add_flag("--no-autoencoder", audit.no_autoencoder);
    audit_cmd->add_flag("--full", audit.full, "Print every entry instead of the worst per property");
    audit_cmd->add_option("--out", audit.out, "Write the full report to a file");

    DumpOptions dump;
    auto* dump_cmd = app.add_subcommand("dump-fisher", "Print metric blocks at initialization");
    dump_cmd->add_option("--metric", dump.metric)
        ->check(CLI::IsMember({"fisher", "backpropagated", "op", "monte_carlo", "full"}));
    dump_cmd->add_option("--activation", dump.activation)->check(CLI::IsMember({"sigmoid", "tanh"}));
    dump_cmd->add_option("--interpretation", dump.interpretation)
        ->check(CLI::IsMember({"bernoulli", "square_loss", "square", "softmax", "spherical"}));
    dump_cmd->add_option("--net", dump.net);
    dump_cmd->add_option("--seed", dump.seed);
    dump_cmd->add_option("--mc-samples", dump.mc_samples)->check(CLI::PositiveNumber);
    dump_cmd->add_option("--samples", dump.samples)->check(CLI::PositiveNumber);
    dump_cmd->add_flag("--qd", dump.qd, "Quasi-diagonal blocks");
    dump_cmd->add_option("--out", dump.out);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run_cmd) return run_command(run);
        if (*audit_cmd) return audit_command(audit);
        if (*dump_cmd) return dump_command(dump);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "invnet: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
