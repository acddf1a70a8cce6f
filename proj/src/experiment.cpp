#include "invnet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "invnet/netspec.hpp"
#include "invnet/reparam.hpp"

namespace invnet {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<UnitId> pick(std::mt19937_64& rng, UnitId first, std::size_t count, std::size_t k) {
    std::vector<UnitId> pool(count);
    std::iota(pool.begin(), pool.end(), first);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(k);
    return pool;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

NetworkTopology generate_autoencoder(std::uint64_t seed) {
    constexpr auto& sizes = kAutoencoderLayers;
    std::vector<UnitId> first(std::size(sizes));
    UnitId next = 1;
    for (std::size_t l = 0; l < std::size(sizes); ++l) {
        first[l] = next;
        next += sizes[l];
    }
    const std::size_t units = next;
    std::vector<std::vector<UnitId>> incoming(units);
    std::mt19937_64 rng(seed);

    for (std::size_t i = 0; i < sizes[0]; ++i)
        for (UnitId j : pick(rng, first[1], sizes[1], kAutoencoderFan)) incoming[j].push_back(first[0] + i);
    for (std::size_t i = 0; i < sizes[1]; ++i)
        for (UnitId j : pick(rng, first[2], sizes[2], kAutoencoderFan)) incoming[j].push_back(first[1] + i);
    for (std::size_t j = 0; j < sizes[3]; ++j) incoming[first[3] + j] = pick(rng, first[2], sizes[2], kAutoencoderFan);
    for (std::size_t j = 0; j < sizes[4]; ++j) incoming[first[4] + j] = pick(rng, first[3], sizes[3], kAutoencoderFan);
    for (auto& in : incoming) std::sort(in.begin(), in.end());

    std::vector<UnitId> inputs(sizes[0]);
    std::iota(inputs.begin(), inputs.end(), first[0]);
    std::vector<UnitId> outputs(sizes[4]);
    std::iota(outputs.begin(), outputs.end(), first[4]);
    return NetworkTopology(units, std::move(incoming), std::move(inputs), std::move(outputs));
}

NetworkTopology generate_layered(std::uint64_t seed, std::span<const std::size_t> sizes, double density,
                                 double skip_density) {
    if (sizes.size() < 2) throw std::invalid_argument("generate_layered: need at least two layers");
    std::vector<UnitId> first(sizes.size());
    UnitId next = 1;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        if (sizes[l] == 0) throw std::invalid_argument("generate_layered: empty layer");
        first[l] = next;
        next += sizes[l];
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<std::vector<UnitId>> incoming(next);
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        for (std::size_t j = 0; j < sizes[l]; ++j) {
            auto& in = incoming[first[l] + j];
            if (l >= 2)
                for (std::size_t i = 0; i < sizes[l - 2]; ++i)
                    if (uniform(rng) < skip_density) in.push_back(first[l - 2] + i);
            for (std::size_t i = 0; i < sizes[l - 1]; ++i)
                if (uniform(rng) < density) in.push_back(first[l - 1] + i);
            if (in.empty()) in.push_back(first[l - 1] + rng() % sizes[l - 1]);
        }
    }
    // every non-output unit feeds something
    std::vector<bool> used(next, false);
    for (const auto& in : incoming)
        for (UnitId i : in) used[i] = true;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        for (std::size_t i = 0; i < sizes[l]; ++i)
            if (!used[first[l] + i]) incoming[first[l + 1] + rng() % sizes[l + 1]].push_back(first[l] + i);
    for (auto& in : incoming) std::sort(in.begin(), in.end());
    std::vector<UnitId> inputs(sizes.front());
    std::iota(inputs.begin(), inputs.end(), first.front());
    std::vector<UnitId> outputs(sizes.back());
    std::iota(outputs.begin(), outputs.end(), first.back());
    return NetworkTopology(next, std::move(incoming), std::move(inputs), std::move(outputs));
}

ParameterSet random_params(const NetworkTopology& topology, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ParameterSet params(topology);
    for (UnitId k : topology.trainable_units()) {
        auto w = params.block(k);
        const double d = std::max<double>(1.0, static_cast<double>(w.size() - 1));
        for (double& v : w) v = scale * normal(rng) / std::sqrt(d);
    }
    return params;
}

Dataset generate_dataset(std::uint64_t seed, std::size_t samples, std::size_t length) {
    std::mt19937_64 rng(seed);
    Dataset data(samples);
    for (Sample& s : data) {
        s.input.resize(length);
        for (double& x : s.input) x = static_cast<double>(rng() & 1U);
        s.target = s.input;
    }
    return data;
}

Dataset generate_task_dataset(const NetworkTopology& topology, Interpretation interpretation, std::uint64_t seed,
                              std::size_t samples) {
    const std::size_t n_in = topology.inputs().size();
    const std::size_t n_out = topology.outputs().size();
    const bool copy = n_in == n_out &&
                      (interpretation == Interpretation::bernoulli || interpretation == Interpretation::square_loss);
    if (copy) return generate_dataset(seed, samples, n_in);
    std::mt19937_64 rng(seed);
    Dataset data(samples);
    for (Sample& s : data) {
        s.input.resize(n_in);
        for (double& x : s.input) x = static_cast<double>(rng() & 1U);
        s.target.assign(n_out, 0.0);
        if (interpretation == Interpretation::softmax || interpretation == Interpretation::spherical)
            s.target[rng() % n_out] = 1.0;
        else
            for (double& y : s.target) y = static_cast<double>(rng() & 1U);
    }
    return data;
}

Dataset encode_inputs(const Dataset& data, ActivationKind activation) {
    Dataset out = data;
    if (activation == ActivationKind::tanh)
        for (Sample& s : out)
            for (double& x : s.input) x = 2.0 * x - 1.0;
    return out;
}

ParameterSet initialize_params(const NetworkTopology& topology, ActivationKind activation, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ParameterSet params(topology);
    for (UnitId k : topology.trainable_units()) {
        auto w = params.block(k);
        const double d = static_cast<double>(w.size() - 1);
        w[0] = 0.0;
        for (std::size_t s = 1; s < w.size(); ++s) w[s] = normal(rng) / std::sqrt(d);
    }
    if (activation == ActivationKind::sigmoid)
        return convert_sigmoid_tanh(topology, params, ConversionDirection::tanh_to_sigmoid);
    return params;
}

std::size_t default_budget(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::backprop:
            return 10000;
        case OptimizerKind::unitwise_natural:
            return 2200;
        case OptimizerKind::qd_natural:
            return 2950;
        case OptimizerKind::backpropagated_metric:
            return 4250;
        case OptimizerKind::qd_backpropagated_metric:
            return 7450;
        case OptimizerKind::mc_unitwise_natural:
            return 2850;
        case OptimizerKind::mc_qd_natural:
            return 3950;
        case OptimizerKind::unitwise_op:
            return 4050;
        case OptimizerKind::diagonal_gauss_newton:
            return 7750;
        case OptimizerKind::adagrad:
            return 8050;
    }
    return 0;
}

RunSetup prepare_run(const ExperimentConfig& config, std::size_t run) {
    const std::uint64_t seed = config.optimizer.seed;
    NetworkTopology topo;
    if (config.network_spec.empty())
        topo = generate_autoencoder(mix_seed(seed, run, 1));
    else
        topo = load_network_spec(config.network_spec).topology();
    Network net(topo, config.activation, config.interpretation);
    Dataset data = generate_task_dataset(topo, config.interpretation, mix_seed(seed, run, 2));
    data = encode_inputs(data, config.activation);
    ParameterSet params = initialize_params(topo, config.activation, mix_seed(seed, run, 3));
    return RunSetup{std::move(net), std::move(data), std::move(params)};
}

RunRecord run_single(const ExperimentConfig& config, std::size_t run) {
    RunRecord record;
    record.run = run;
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        if (!config.record_clock) return 0.0;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    const std::size_t budget = config.iterations.value_or(default_budget(config.optimizer.kind));

    RunSetup setup = prepare_run(config, run);
    OptimizerConfig opt = config.optimizer;
    opt.seed = mix_seed(config.optimizer.seed, run, 4);

    const double initial = nats_to_bits(evaluate_loss(setup.net, setup.params, setup.data, Execution::serial));
    record.rows.push_back({0, opt.lr0, false, initial, elapsed()});
    if (!std::isfinite(initial)) {
        record.aborted = true;
        record.diagnostic = "non-finite initial loss";
        return record;
    }
    if (config.online) {
        try {
            const std::size_t n_init = OnlineTrainer::default_init_size(setup.net.topology());
            Dataset init;
            for (std::size_t i = 0; i < n_init; ++i) init.push_back(setup.data[i % setup.data.size()]);
            OnlineTrainer trainer(setup.net, setup.params, init, opt);
            for (std::size_t t = 1; t <= budget; ++t) {
                trainer.step(setup.params, setup.data[(t - 1) % setup.data.size()], opt.lr0);
                const double bits =
                    nats_to_bits(evaluate_loss(setup.net, setup.params, setup.data, Execution::serial));
                record.rows.push_back({t, opt.lr0, true, bits, elapsed()});
                if (!std::isfinite(bits)) {
                    record.aborted = true;
                    record.diagnostic = "step " + std::to_string(t) + ": non-finite loss";
                    return record;
                }
            }
        } catch (const std::exception& e) {
            record.rows.push_back({record.rows.size(), opt.lr0, false, std::nan(""), elapsed()});
            record.aborted = true;
            record.diagnostic = e.what();
        }
        return record;
    }

    BatchTrainer trainer(setup.net, setup.data, opt, Execution::serial);
    for (std::size_t epoch = 1; epoch <= budget; ++epoch) {
        EpochResult result;
        try {
            result = trainer.epoch(setup.params);
        } catch (const std::exception& e) {
            record.rows.push_back({epoch, trainer.controller().eta(), false, std::nan(""), elapsed()});
            record.aborted = true;
            record.diagnostic = std::string("epoch ") + std::to_string(epoch) + ": " + e.what();
            return record;
        }
        const double bits = nats_to_bits(result.loss);
        record.rows.push_back({epoch, result.eta, result.accepted, bits, elapsed()});
        if (!std::isfinite(bits)) {
            record.aborted = true;
            record.diagnostic = "epoch " + std::to_string(epoch) + ": non-finite loss";
            return record;
        }
    }
    return record;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.runs == 0) throw std::invalid_argument("run_experiment: at least one run is needed");
    ExperimentResult result;
    result.runs.resize(config.runs);
    const auto runs = static_cast<std::ptrdiff_t>(config.runs);
    std::vector<std::string> failures(config.runs);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < runs; ++r) {
        const auto run = static_cast<std::size_t>(r);
        try {
            result.runs[run] = run_single(config, run);
        } catch (const std::exception& e) {
            failures[run] = e.what();
        }
    }
    for (const auto& f : failures)
        if (!f.empty()) throw std::runtime_error(f);

    ExperimentSummary& s = result.summary;
    s.method = std::string(to_string(config.optimizer.kind));
    s.activation = std::string(to_string(config.activation));
    s.iterations = config.iterations.value_or(default_budget(config.optimizer.kind));
    s.runs = config.runs;
    for (const RunRecord& rec : result.runs) {
        if (rec.aborted) {
            ++s.aborted;
            continue;
        }
        s.final_bits.push_back(rec.final_loss_bits());
    }
    if (!s.final_bits.empty()) {
        const double n = static_cast<double>(s.final_bits.size());
        s.mean_bits = std::accumulate(s.final_bits.begin(), s.final_bits.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : s.final_bits) ss += (v - s.mean_bits) * (v - s.mean_bits);
        s.std_bits = s.final_bits.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    } else {
        s.mean_bits = s.std_bits = std::nan("");
    }
    return result;
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
    out << "epoch,eta,accepted,loss_bits,elapsed_s\n";
    for (const EpochRow& row : record.rows)
        out << row.epoch << ',' << format_double(row.eta) << ',' << (row.accepted ? 1 : 0) << ','
            << format_double(row.loss_bits) << ',' << format_double(row.elapsed_s) << '\n';
}

std::string summary_json(const ExperimentConfig& config, const ExperimentSummary& summary,
                         const std::vector<RunRecord>& runs) {
    nlohmann::ordered_json j;
    j["method"] = summary.method;
    j["activation"] = summary.activation;
    j["interpretation"] = std::string(to_string(config.interpretation));
    j["iterations"] = summary.iterations;
    j["runs"] = summary.runs;
    j["aborted"] = summary.aborted;
    j["optimizer"] = nlohmann::ordered_json::parse(config_to_json(config.optimizer));
    j["mode"] = config.online ? "online" : "batch";
    j["network"] = config.network_spec.empty() ? std::string("autoencoder") : config.network_spec;
    if (std::isfinite(summary.mean_bits)) {
        j["mean_bits"] = summary.mean_bits;
        j["std_bits"] = summary.std_bits;
    } else {
        j["mean_bits"] = nullptr;
        j["std_bits"] = nullptr;
    }
    j["final_bits"] = summary.final_bits;
    auto diagnostics = nlohmann::ordered_json::array();
    for (const RunRecord& rec : runs)
        if (rec.aborted) diagnostics.push_back({{"run", rec.run}, {"diagnostic", rec.diagnostic}});
    j["diagnostics"] = std::move(diagnostics);
    return j.dump(2);
}

}  // namespace invnet
