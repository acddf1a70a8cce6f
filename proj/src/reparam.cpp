#include "invnet/reparam.hpp"

#include <stdexcept>

namespace invnet {

ParameterSet reparametrize_affine(Network& net, const ParameterSet& params, UnitId k, double alpha, double beta,
                                  double gamma) {
    const auto& topo = net.topology();
    if (k == kBiasUnit || k >= topo.unit_count()) throw std::invalid_argument("reparametrize_affine: bad unit");
    if (topo.is_output(k)) throw std::invalid_argument("reparametrize_affine: output units are not reparametrized");
    if (alpha == 0.0 || gamma == 0.0) throw std::invalid_argument("reparametrize_affine: alpha and gamma must be nonzero");
    for (const OutgoingEdge& e : topo.outgoing(k))
        if (net.frame(e.to)) throw std::invalid_argument("reparametrize_affine: successor carries an input frame");

    ParameterSet out = params;
    if (!topo.is_input(k))
        for (double& w : out.block(k)) w /= gamma;
    for (const OutgoingEdge& e : topo.outgoing(k)) {
        const double w = params.at(e.to, e.slot);
        out.at(e.to, 0) -= w * beta / alpha;
        out.at(e.to, e.slot) = w / alpha;
    }

    const UnitChart old = net.chart(k);
    UnitChart chart;
    chart.alpha = alpha * old.alpha;
    chart.beta = alpha * old.beta + beta;
    chart.gamma = topo.is_input(k) ? old.gamma : gamma * old.gamma;
    net.set_chart(k, chart);
    return out;
}

ParameterSet convert_sigmoid_tanh(const NetworkTopology& topology, const ParameterSet& params,
                                  ConversionDirection direction) {
    ParameterSet out = params;
    for (UnitId k : topology.trainable_units()) {
        const auto in = params.block(k);
        auto w = out.block(k);
        double sum = 0.0;
        for (std::size_t s = 1; s < in.size(); ++s) sum += in[s];
        if (direction == ConversionDirection::sigmoid_to_tanh) {
            w[0] = in[0] / 2.0 + sum / 4.0;
            for (std::size_t s = 1; s < in.size(); ++s) w[s] = in[s] / 4.0;
        } else {
            w[0] = 2.0 * in[0] - 2.0 * sum;
            for (std::size_t s = 1; s < in.size(); ++s) w[s] = 4.0 * in[s];
        }
    }
    return out;
}

Network with_activation(const Network& net, ActivationKind activation) {
    return Network(net.topology(), activation, net.interpretation());
}

ParameterSet recombine_inputs(Network& net, const ParameterSet& params, UnitId k, const Matrix& mix,
                              std::span<const double> shift) {
    const auto& topo = net.topology();
    if (k == kBiasUnit || k >= topo.unit_count() || topo.is_input(k))
        throw std::invalid_argument("recombine_inputs: unit has no incoming parameters");
    if (net.frame(k)) throw std::invalid_argument("recombine_inputs: unit already carries a frame");
    const std::size_t d = topo.incoming(k).size();
    if (mix.rows() != d || mix.cols() != d || shift.size() != d)
        throw std::invalid_argument("recombine_inputs: frame dimension differs from fan-in");

    Matrix mix_t(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) mix_t(i, j) = mix(j, i);
    const auto theta = params.block(k);
    const auto w = solve_general(mix_t, theta.subspan(1));

    ParameterSet out = params;
    auto block = out.block(k);
    double bias = theta[0];
    for (std::size_t j = 0; j < d; ++j) {
        block[j + 1] = w[j];
        bias -= w[j] * shift[j];
    }
    block[0] = bias;
    net.set_frame(k, InputFrame{mix, std::vector<double>(shift.begin(), shift.end())});
    return out;
}

}  // namespace invnet
