#include "sweeps.hpp"

#include <algorithm>
#include <cmath>

namespace invnet::sweep {

void forward(const Network& net, const ParameterSet& eff, std::span<const double> input, std::span<double> a,
             std::span<double> r) {
    const auto& topo = net.topology();
    a[kBiasUnit] = 1.0;
    r[kBiasUnit] = 0.0;
    const bool sigmoid = net.activation() == ActivationKind::sigmoid;
    for (UnitId k : topo.order()) {
        const UnitChart& chart = net.chart(k);
        if (topo.is_input(k)) {
            a[k] = chart.alpha * input[topo.input_index(k)] + chart.beta;
            r[k] = 0.0;
            continue;
        }
        const auto w = eff.block(k);
        const auto in = topo.incoming(k);
        double pre = w[0];
        for (std::size_t s = 0; s < in.size(); ++s) pre += w[s + 1] * a[in[s]];
        const double t = chart.gamma * pre;
        double value;
        double slope;
        if (sigmoid) {
            value = 1.0 / (1.0 + std::exp(-t));
            slope = value * (1.0 - value);
        } else {
            value = std::tanh(t);
            slope = 1.0 - value * value;
        }
        a[k] = chart.alpha * value + chart.beta;
        r[k] = chart.alpha * chart.gamma * slope;
    }
}

void backward(const Network& net, const ParameterSet& eff, std::span<const double> r, std::span<const double> u,
              std::span<const double> target, std::span<double> b) {
    const auto& topo = net.topology();
    const auto outs = topo.outputs();
    std::fill(b.begin(), b.end(), 0.0);
    std::vector<double> bu(outs.size());
    interpretation_backprop(net.interpretation(), u, target, bu);
    const double slope = net.output_slope();
    for (std::size_t o = 0; o < outs.size(); ++o) b[outs[o]] = slope * bu[o];

    const auto order = topo.order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const UnitId i = *it;
        if (topo.is_output(i)) continue;
        double s = 0.0;
        for (const OutgoingEdge& e : topo.outgoing(i)) s += eff.at(e.to, e.slot) * r[e.to] * b[e.to];
        b[i] = s;
    }
}

OutputFisher activity_fisher(const Network& net, std::span<const double> u) {
    OutputFisher f = interpretation_fisher(net.interpretation(), u);
    const double c = net.output_slope();
    if (c != 1.0) {
        for (double& d : f.diag) d *= c * c;
        for (double& v : f.coupling) v *= c;
    }
    return f;
}

void transfer_rates(const Network& net, const ParameterSet& eff, std::span<const double> r, TransferRates& rates) {
    const auto& topo = net.topology();
    const std::size_t n_out = topo.outputs().size();
    const auto order = topo.order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const UnitId k = *it;
        if (topo.is_input(k)) continue;
        auto row = rates.row(k);
        std::fill(row.begin(), row.end(), 0.0);
        if (topo.is_output(k)) {
            row[topo.output_index(k)] = 1.0;
            continue;
        }
        for (const OutgoingEdge& e : topo.outgoing(k)) {
            const double f = eff.at(e.to, e.slot) * r[e.to];
            if (topo.is_output(e.to)) {
                // closed form on the last hidden layer: J_k^o = w_ko r_o
                row[topo.output_index(e.to)] += f;
            } else {
                const auto next = rates.row(e.to);
                for (std::size_t o = 0; o < n_out; ++o) row[o] += f * next[o];
            }
        }
    }
}

double modulus_from_row(const OutputFisher& fisher, std::span<const double> row) {
    double quad = 0.0;
    for (std::size_t o = 0; o < row.size(); ++o) quad += fisher.diag[o] * row[o] * row[o];
    if (fisher.coupling.empty()) return quad;
    double lin = 0.0;
    for (std::size_t o = 0; o < row.size(); ++o) lin += fisher.coupling[o] * row[o];
    return quad - lin * lin;
}

double cross_modulus_from_rows(const OutputFisher& fisher, std::span<const double> row, std::span<const double> row2) {
    double quad = 0.0;
    for (std::size_t o = 0; o < row.size(); ++o) quad += fisher.diag[o] * row[o] * row2[o];
    if (fisher.coupling.empty()) return quad;
    double lin = 0.0;
    double lin2 = 0.0;
    for (std::size_t o = 0; o < row.size(); ++o) {
        lin += fisher.coupling[o] * row[o];
        lin2 += fisher.coupling[o] * row2[o];
    }
    return quad - lin * lin2;
}

void backprop_modulus(const Network& net, const ParameterSet& eff, std::span<const double> r,
                      const OutputFisher& fisher, std::span<double> m) {
    const auto& topo = net.topology();
    std::fill(m.begin(), m.end(), 0.0);
    const auto outs = topo.outputs();
    for (std::size_t o = 0; o < outs.size(); ++o) {
        const double v = fisher.coupling.empty() ? 0.0 : fisher.coupling[o];
        m[outs[o]] = fisher.diag[o] - v * v;
    }
    const auto order = topo.order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const UnitId k = *it;
        if (topo.is_output(k) || topo.is_input(k)) continue;
        double s = 0.0;
        for (const OutgoingEdge& e : topo.outgoing(k)) {
            const double f = eff.at(e.to, e.slot) * r[e.to];
            s += f * f * m[e.to];
        }
        m[k] = s;
    }
}

}  // namespace invnet::sweep
