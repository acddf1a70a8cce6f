#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "invnet/network.hpp"

namespace invnet {

/// Activities a_k and activation derivatives r_k = d a_k / d y_k for one input.
/// a[0] = 1; r is 0 on the bias and input units.
struct ForwardState {
    std::vector<double> a;
    std::vector<double> r;
};

struct Sample {
    std::vector<double> input;
    std::vector<double> target;
};

using Dataset = std::vector<Sample>;

/// Checks input lengths and target domains; throws std::invalid_argument /
/// std::domain_error.
void validate_dataset(const Network& net, const Dataset& data);

/// Propagates `input` (one real per input unit, in inputs() order) in topological order.
ForwardState forward(const Network& net, const ParameterSet& params, std::span<const double> input);

/// -ln omega(y) in nats for the decoded outputs of `state`.
double loss(const Network& net, const ForwardState& state, std::span<const double> target);

/// Dataset-average loss in nats.
double mean_loss(const Network& net, const ParameterSet& params, const Dataset& data);

inline double nats_to_bits(double nats) { return nats / std::numbers::ln2; }

}  // namespace invnet
