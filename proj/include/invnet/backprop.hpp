#pragma once

#include <span>
#include <vector>

#include "invnet/forward.hpp"
#include "invnet/network.hpp"

namespace invnet {

/// b_k = -d loss / d a_k and the reduced value r_k b_k for one sample.
struct BackwardState {
    std::vector<double> b;
    std::vector<double> b_tilde;
};

/// Transfer rates J_k^{o} = d a_o / d a_k, one row per unit, one column per
/// output unit (in outputs() order). Rows of input units are not computed and
/// stay zero.
class TransferRates {
public:
    TransferRates() = default;
    TransferRates(std::size_t units, std::size_t outputs) : outputs_(outputs), data_(units * outputs, 0.0) {}

    std::size_t output_count() const { return outputs_; }
    double operator()(UnitId k, std::size_t out) const { return data_[k * outputs_ + out]; }
    std::span<const double> row(UnitId k) const { return {data_.data() + k * outputs_, outputs_}; }
    std::span<double> row(UnitId k) { return {data_.data() + k * outputs_, outputs_}; }

private:
    std::size_t outputs_ = 0;
    std::vector<double> data_;
};

BackwardState backpropagate(const Network& net, const ParameterSet& params, const ForwardState& state,
                            std::span<const double> target);

TransferRates transfer_rates(const Network& net, const ParameterSet& params, const ForwardState& state);

/// Fisher modulus Phi_k for every unit (0 on inputs and the bias unit).
std::vector<double> fisher_modulus(const Network& net, const TransferRates& rates, const ForwardState& state);

/// Phi_{k k'}; symmetric, and Phi_{kk} equals fisher_modulus()[k].
double cross_fisher_modulus(const Network& net, const TransferRates& rates, const ForwardState& state, UnitId k,
                            UnitId k2);

/// Backpropagated modulus m_k in a single backward sweep.
std::vector<double> backprop_modulus(const Network& net, const ParameterSet& params, const ForwardState& state);

/// Per-sample loss gradient -d loss / d theta, i.e. z_i r_k b_k at every unit.
ParameterSet sample_gradient(const Network& net, const ParameterSet& params, const ForwardState& state,
                             const BackwardState& back);

/// G_i^(k): dataset average of z_i r_k b_k. Throws on an empty dataset.
ParameterSet gradient_blocks(const Network& net, const ParameterSet& params, const Dataset& data);

}  // namespace invnet
