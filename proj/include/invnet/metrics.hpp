#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>

#include "invnet/kernels.hpp"

namespace invnet {

/// Largest parameter count accepted by the whole-network oracles.
inline constexpr std::size_t kFullMetricParameterLimit = 2000;

/// F^(k) = E_x[z z^T r_k^2 Phi_k] at every unit.
MetricBatch unitwise_fisher(const Network& net, const ParameterSet& params, const Dataset& data,
                            BlockShape shape = BlockShape::full, Execution execution = Execution::parallel);

/// M^(k) = E_x[z z^T r_k^2 m_k].
MetricBatch backpropagated_metric(const Network& net, const ParameterSet& params, const Dataset& data,
                                  BlockShape shape = BlockShape::full, Execution execution = Execution::parallel);

/// E_x[z z^T r_k^2 b_k^2]: the outer-product metric restricted to each unit.
MetricBatch op_metric(const Network& net, const ParameterSet& params, const Dataset& data,
                      BlockShape shape = BlockShape::full, Execution execution = Execution::parallel);

/// Unbiased estimate of F^(k) from `samples` targets drawn per input.
MetricBatch monte_carlo_fisher(const Network& net, const ParameterSet& params, const Dataset& data,
                               std::size_t samples, std::uint64_t seed, BlockShape shape = BlockShape::full,
                               Execution execution = Execution::parallel, std::uint64_t stream = 0);

/// Fisher matrix over all parameters, indexed like ParameterSet::values():
/// E_x[z_i z_j r_k r_k' Phi_kk']. Throws std::length_error above kFullMetricParameterLimit.
Matrix full_fisher(const Network& net, const ParameterSet& params, const Dataset& data);

/// E_x[g_x g_x^T] over all parameters, g_x the per-sample loss gradient.
Matrix full_op_metric(const Network& net, const ParameterSet& params, const Dataset& data);

/// Keeps A_00, A_0i and A_ii. Throws NumericalError unless A_00 > 0.
QuasiDiagonal quasi_diagonal_reduce(const SymMatrix& a);

/// Row-major text dump with 17 significant digits, preceded by "# <label> <rows> <cols>".
void dump_matrix(std::ostream& out, std::string_view label, const Matrix& m);
void dump_blocks(std::ostream& out, const MetricBatch& batch);

}  // namespace invnet
