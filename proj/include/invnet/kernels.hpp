#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "invnet/forward.hpp"
#include "invnet/linalg.hpp"
#include "invnet/network.hpp"

namespace invnet {

/// Serial drivers are the reference; parallel drivers run the same per-item
/// bodies under OpenMP and produce bit-identical results.
enum class Execution { serial, parallel };

enum class MetricKind { none, fisher, backpropagated, outer_product, monte_carlo };

enum class BlockShape { full, quasi_diagonal };

/// Per-unit metric over theta_k = (bias, incoming weights), either the full
/// symmetric block or its quasi-diagonal entries.
struct UnitMetricBlock {
    UnitId unit = 0;
    std::variant<SymMatrix, QuasiDiagonal> entries;

    bool is_quasi_diagonal() const { return std::holds_alternative<QuasiDiagonal>(entries); }
    const SymMatrix& full() const { return std::get<SymMatrix>(entries); }
    const QuasiDiagonal& qd() const { return std::get<QuasiDiagonal>(entries); }
    SymMatrix& full() { return std::get<SymMatrix>(entries); }
    QuasiDiagonal& qd() { return std::get<QuasiDiagonal>(entries); }
    std::size_t order() const;

    /// (A + eps Id)^{-1} g for a full block; for a qd block eps is added to A_00 and every A_ii.
    std::vector<double> solve(std::span<const double> g, double eps) const;
};

struct SweepRequest {
    MetricKind metric = MetricKind::none;
    BlockShape shape = BlockShape::full;
    std::size_t mc_samples = 1;
    std::uint64_t seed = 0;
    /// Mixed into the Monte Carlo seed together with the sample index.
    std::uint64_t stream = 0;
};

/// Dataset averages at the current parameters: one metric block per unit id
/// (empty order-0 blocks on inputs and the bias unit), the gradient
/// G = E[z r b], and the mean loss in nats.
struct MetricBatch {
    std::vector<UnitMetricBlock> blocks;
    ParameterSet gradient;
    double mean_loss = 0.0;
};

/// Per-sample quantities, samples x units, row-major.
struct SampleSweep {
    std::size_t units = 0;
    std::size_t samples = 0;
    std::vector<double> activity;
    std::vector<double> reduced_b;  // r_k b_k
    std::vector<double> weight;     // per-unit metric weight, e.g. r_k^2 Phi_k
    std::vector<double> loss;

    std::span<const double> activity_row(std::size_t n) const { return {activity.data() + n * units, units}; }
};

/// Seed of the Monte Carlo target stream for one sample.
std::uint64_t monte_carlo_seed(std::uint64_t seed, std::uint64_t stream, std::size_t sample);

SampleSweep sweep_samples(const Network& net, const ParameterSet& params, const Dataset& data,
                          const SweepRequest& request, Execution execution);

/// Validates the dataset, sweeps samples, then accumulates blocks and gradient
/// per unit with pairwise summation in dataset order.
MetricBatch accumulate_metric(const Network& net, const ParameterSet& params, const Dataset& data,
                              const SweepRequest& request, Execution execution);

/// Mean loss in nats; per-sample losses are summed in dataset order.
double evaluate_loss(const Network& net, const ParameterSet& params, const Dataset& data, Execution execution);

}  // namespace invnet
