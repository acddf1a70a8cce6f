#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invnet/optimizers.hpp"

namespace invnet {

/// Layer sizes of the sparse auto-encoder.
inline constexpr std::size_t kAutoencoderLayers[] = {100, 30, 10, 30, 100};
inline constexpr std::size_t kAutoencoderFan = 5;

/// 100-30-10-30-100 auto-encoder: every input links to 5 distinct units of
/// layer 2, every layer-2 unit to 5 of layer 3; every output receives from 5
/// units of layer 4 and every layer-4 unit from 5 units of layer 3.
/// Unit ids run layer by layer from 1.
NetworkTopology generate_autoencoder(std::uint64_t seed);

/// Random layered DAG. Each unit of layer l+1 receives from each unit of layer
/// l with probability `density` and from each unit of layer l-1 with
/// probability `skip_density`. Every unit gets at least one incoming edge
/// and every non-output unit at least one outgoing edge.
NetworkTopology generate_layered(std::uint64_t seed, std::span<const std::size_t> sizes, double density,
                                 double skip_density = 0.0);

/// Every parameter, biases included, drawn from N(0, scale^2 / max(d, 1)).
ParameterSet random_params(const NetworkTopology& topology, std::uint64_t seed, double scale = 1.0);

/// `samples` random binary strings of length `length`, each its own target.
Dataset generate_dataset(std::uint64_t seed, std::size_t samples = 16, std::size_t length = 100);

/// Random binary inputs for any topology; targets copy the input when the
/// interpretation allows it and sizes match, else are drawn valid at random.
Dataset generate_task_dataset(const NetworkTopology& topology, Interpretation interpretation, std::uint64_t seed,
                              std::size_t samples = 16);

/// Binary inputs become 2x - 1 for tanh networks, so that matched sigmoid and
/// tanh parameters see corresponding activities.
Dataset encode_inputs(const Dataset& data, ActivationKind activation);

/// tanh: weights N(0, 1/d), biases 0, d the fan-in. sigmoid: the same draw
/// mapped through the tanh-to-sigmoid conversion (weights N(0, 16/d), bias
/// -sum w / 2), so both activations start from the same function.
ParameterSet initialize_params(const NetworkTopology& topology, ActivationKind activation, std::uint64_t seed);

/// Iteration budgets per method.
std::size_t default_budget(OptimizerKind kind);

struct ExperimentConfig {
    OptimizerConfig optimizer;
    ActivationKind activation = ActivationKind::sigmoid;
    Interpretation interpretation = Interpretation::bernoulli;
    /// Unset selects default_budget().
    std::optional<std::size_t> iterations;
    std::size_t runs = 20;
    /// Network spec file; the auto-encoder generator is used when empty.
    std::string network_spec;
    bool record_clock = true;
    /// Streaming updates with a constant rate lr0 instead of adaptive batch epochs;
    /// one row per sample visited, samples taken cyclically.
    bool online = false;
};

struct EpochRow {
    std::size_t epoch = 0;
    double eta = 0.0;
    bool accepted = false;
    double loss_bits = 0.0;
    double elapsed_s = 0.0;
};

struct RunRecord {
    std::size_t run = 0;
    std::vector<EpochRow> rows;
    bool aborted = false;
    std::string diagnostic;

    double final_loss_bits() const { return rows.empty() ? 0.0 : rows.back().loss_bits; }
};

struct ExperimentSummary {
    std::string method;
    std::string activation;
    std::size_t iterations = 0;
    std::size_t runs = 0;
    std::size_t aborted = 0;
    double mean_bits = 0.0;
    double std_bits = 0.0;
    std::vector<double> final_bits;
};

struct ExperimentResult {
    std::vector<RunRecord> runs;
    ExperimentSummary summary;
};

/// Network, dataset and initial parameters of run `run`.
struct RunSetup {
    Network net;
    Dataset data;
    ParameterSet params;
};

RunSetup prepare_run(const ExperimentConfig& config, std::size_t run);

RunRecord run_single(const ExperimentConfig& config, std::size_t run);

/// Runs execute in parallel; each run is reproducible from the config alone.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Header "epoch,eta,accepted,loss_bits,elapsed_s", one row per epoch.
void write_run_csv(std::ostream& out, const RunRecord& record);
/// Mean and sample standard deviation over non-aborted runs plus the configuration.
std::string summary_json(const ExperimentConfig& config, const ExperimentSummary& summary,
                         const std::vector<RunRecord>& runs);

}  // namespace invnet
