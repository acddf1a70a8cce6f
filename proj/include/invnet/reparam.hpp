#pragma once

#include "invnet/network.hpp"

namespace invnet {

/// Replaces the activity of unit k by alpha * a_k + beta and divides its
/// incoming parameters by gamma, compensating downstream so that the network
/// function is unchanged. Updates the unit's chart in `net` and returns the
/// new parameters. Rejects the bias unit, output units and units feeding a
/// unit that carries an input frame.
ParameterSet reparametrize_affine(Network& net, const ParameterSet& params, UnitId k, double alpha, double beta,
                                  double gamma);

enum class ConversionDirection { sigmoid_to_tanh, tanh_to_sigmoid };

/// Parameter map between a sigmoid network and the tanh network computing
/// a' = 2a - 1 at every unit (inputs included):
/// w' = w / 4, w'_0 = w_0 / 2 + sum w / 4, and its inverse.
ParameterSet convert_sigmoid_tanh(const NetworkTopology& topology, const ParameterSet& params,
                                  ConversionDirection direction);

/// Same topology and interpretation under the other activation. Charts and
/// frames are not carried over.
Network with_activation(const Network& net, ActivationKind activation);

/// Makes unit k see z = mix * a_E + shift and returns dually transformed
/// parameters (theta'_w = mix^{-T} theta_w, theta'_0 = theta_0 - theta'_w . shift)
/// so that the network function is unchanged. The unit must not already carry a frame.
ParameterSet recombine_inputs(Network& net, const ParameterSet& params, UnitId k, const Matrix& mix,
                              std::span<const double> shift);

}  // namespace invnet
