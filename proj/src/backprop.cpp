#include "invnet/backprop.hpp"

#include <stdexcept>

#include "invnet/interpretation.hpp"
#include "sweeps.hpp"

namespace invnet {

BackwardState backpropagate(const Network& net, const ParameterSet& params, const ForwardState& state,
                            std::span<const double> target) {
    const auto& topo = net.topology();
    BackwardState back;
    back.b.assign(topo.unit_count(), 0.0);
    back.b_tilde.assign(topo.unit_count(), 0.0);
    const auto u = decode_outputs(net, state.a);
    sweep::backward(net, effective_weights(net, params), state.r, u, target, back.b);
    for (UnitId k = 0; k < topo.unit_count(); ++k) back.b_tilde[k] = state.r[k] * back.b[k];
    return back;
}

TransferRates transfer_rates(const Network& net, const ParameterSet& params, const ForwardState& state) {
    const auto& topo = net.topology();
    TransferRates rates(topo.unit_count(), topo.outputs().size());
    sweep::transfer_rates(net, effective_weights(net, params), state.r, rates);
    return rates;
}

std::vector<double> fisher_modulus(const Network& net, const TransferRates& rates, const ForwardState& state) {
    const auto& topo = net.topology();
    const OutputFisher fisher = sweep::activity_fisher(net, decode_outputs(net, state.a));
    std::vector<double> phi(topo.unit_count(), 0.0);
    for (UnitId k : topo.trainable_units()) phi[k] = sweep::modulus_from_row(fisher, rates.row(k));
    return phi;
}

double cross_fisher_modulus(const Network& net, const TransferRates& rates, const ForwardState& state, UnitId k,
                            UnitId k2) {
    const auto& topo = net.topology();
    if (k >= topo.unit_count() || k2 >= topo.unit_count())
        throw std::out_of_range("cross_fisher_modulus: unit id out of range");
    if (k == kBiasUnit || k2 == kBiasUnit || topo.is_input(k) || topo.is_input(k2)) return 0.0;
    const OutputFisher fisher = sweep::activity_fisher(net, decode_outputs(net, state.a));
    return sweep::cross_modulus_from_rows(fisher, rates.row(k), rates.row(k2));
}

std::vector<double> backprop_modulus(const Network& net, const ParameterSet& params, const ForwardState& state) {
    const OutputFisher fisher = sweep::activity_fisher(net, decode_outputs(net, state.a));
    std::vector<double> m(net.topology().unit_count(), 0.0);
    sweep::backprop_modulus(net, effective_weights(net, params), state.r, fisher, m);
    return m;
}

ParameterSet sample_gradient(const Network& net, const ParameterSet& params, const ForwardState& state,
                             const BackwardState& back) {
    const auto& topo = net.topology();
    ParameterSet g(topo);
    if (!g.same_shape(params)) throw std::invalid_argument("sample_gradient: parameter shape mismatch");
    std::vector<double> z(topo.max_fan_in() + 1);
    for (UnitId k : topo.trainable_units()) {
        auto block = g.block(k);
        unit_features(net, k, state.a, std::span(z).first(block.size()));
        const double rb = state.r[k] * back.b[k];
        for (std::size_t s = 0; s < block.size(); ++s) block[s] = z[s] * rb;
    }
    return g;
}

ParameterSet gradient_blocks(const Network& net, const ParameterSet& params, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("gradient_blocks: empty dataset");
    ParameterSet total(net.topology());
    for (const Sample& s : data) {
        const ForwardState state = forward(net, params, s.input);
        const BackwardState back = backpropagate(net, params, state, s.target);
        total.add_scaled(sample_gradient(net, params, state, back), 1.0);
    }
    const double inv = 1.0 / static_cast<double>(data.size());
    for (double& v : total.values()) v *= inv;
    return total;
}

}  // namespace invnet
