#include "invnet/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "invnet/interpretation.hpp"
#include "sweeps.hpp"

namespace invnet {

void validate_dataset(const Network& net, const Dataset& data) {
    const auto& topo = net.topology();
    for (std::size_t n = 0; n < data.size(); ++n) {
        const Sample& s = data[n];
        if (s.input.size() != topo.inputs().size())
            throw std::invalid_argument("sample " + std::to_string(n) + ": input length " +
                                        std::to_string(s.input.size()) + ", expected " +
                                        std::to_string(topo.inputs().size()));
        for (double x : s.input)
            if (!std::isfinite(x)) throw std::invalid_argument("sample " + std::to_string(n) + ": non-finite input");
        validate_target(net.interpretation(), s.target, topo.outputs().size());
    }
}

ForwardState forward(const Network& net, const ParameterSet& params, std::span<const double> input) {
    const auto& topo = net.topology();
    if (input.size() != topo.inputs().size())
        throw std::invalid_argument("forward: input length " + std::to_string(input.size()) + ", expected " +
                                    std::to_string(topo.inputs().size()));
    ForwardState state;
    state.a.assign(topo.unit_count(), 0.0);
    state.r.assign(topo.unit_count(), 0.0);
    if (net.has_frames())
        sweep::forward(net, effective_weights(net, params), input, state.a, state.r);
    else
        sweep::forward(net, params, input, state.a, state.r);
    return state;
}

double loss(const Network& net, const ForwardState& state, std::span<const double> target) {
    const auto u = decode_outputs(net, state.a);
    return interpretation_loss(net.interpretation(), u, target);
}

double mean_loss(const Network& net, const ParameterSet& params, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("mean_loss: empty dataset");
    const ParameterSet eff = effective_weights(net, params);
    const auto& topo = net.topology();
    std::vector<double> a(topo.unit_count());
    std::vector<double> r(topo.unit_count());
    double total = 0.0;
    for (const Sample& s : data) {
        sweep::forward(net, eff, s.input, a, r);
        total += interpretation_loss(net.interpretation(), decode_outputs(net, a), s.target);
    }
    return total / static_cast<double>(data.size());
}

}  // namespace invnet
