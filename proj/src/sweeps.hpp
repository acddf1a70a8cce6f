#pragma once

// Per-sample sweeps over a network, written against effective weights (see
// effective_weights()). Shared by the public per-sample API and the batched
// kernels.

#include <span>
#include <vector>

#include "invnet/backprop.hpp"
#include "invnet/interpretation.hpp"
#include "invnet/network.hpp"

namespace invnet::sweep {

void forward(const Network& net, const ParameterSet& eff, std::span<const double> input, std::span<double> a,
             std::span<double> r);

/// Seeds b on the output layer from (decoded) outputs and target, then
/// backpropagates. `u` must hold decode_outputs(net, a).
void backward(const Network& net, const ParameterSet& eff, std::span<const double> r, std::span<const double> u,
              std::span<const double> target, std::span<double> b);

/// Output-layer Fisher matrix pulled back to the raw output activities.
OutputFisher activity_fisher(const Network& net, std::span<const double> u);

void transfer_rates(const Network& net, const ParameterSet& eff, std::span<const double> r, TransferRates& rates);

double modulus_from_row(const OutputFisher& fisher, std::span<const double> row);
double cross_modulus_from_rows(const OutputFisher& fisher, std::span<const double> row, std::span<const double> row2);

void backprop_modulus(const Network& net, const ParameterSet& eff, std::span<const double> r,
                      const OutputFisher& fisher, std::span<double> m);

}  // namespace invnet::sweep
