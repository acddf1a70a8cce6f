#include "invnet/network.hpp"

#include <stdexcept>

namespace invnet {

std::string_view to_string(ActivationKind kind) {
    return kind == ActivationKind::sigmoid ? "sigmoid" : "tanh";
}

std::string_view to_string(Interpretation kind) {
    switch (kind) {
        case Interpretation::square_loss: return "square_loss";
        case Interpretation::bernoulli: return "bernoulli";
        case Interpretation::softmax: return "softmax";
        case Interpretation::spherical: return "spherical";
    }
    return "?";
}

ActivationKind parse_activation(std::string_view name) {
    if (name == "sigmoid") return ActivationKind::sigmoid;
    if (name == "tanh") return ActivationKind::tanh;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

Interpretation parse_interpretation(std::string_view name) {
    if (name == "square_loss" || name == "square") return Interpretation::square_loss;
    if (name == "bernoulli") return Interpretation::bernoulli;
    if (name == "softmax") return Interpretation::softmax;
    if (name == "spherical") return Interpretation::spherical;
    throw std::invalid_argument("unknown interpretation '" + std::string(name) + "'");
}

ParameterSet::ParameterSet(const NetworkTopology& topology) {
    offsets_.assign(topology.unit_count() + 1, 0);
    std::vector<std::size_t> sizes(topology.unit_count(), 0);
    for (UnitId k : topology.trainable_units()) sizes[k] = topology.incoming(k).size() + 1;
    for (UnitId k = 0; k < topology.unit_count(); ++k) offsets_[k + 1] = offsets_[k] + sizes[k];
    values_.assign(offsets_.back(), 0.0);
}

void ParameterSet::add_scaled(const ParameterSet& direction, double eta) {
    if (!same_shape(direction)) throw std::invalid_argument("ParameterSet::add_scaled: shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += eta * direction.values_[i];
}

Network::Network(NetworkTopology topology, ActivationKind activation, Interpretation interpretation)
    : topology_(std::move(topology)),
      activation_(activation),
      interpretation_(interpretation),
      charts_(topology_.unit_count()),
      frames_(topology_.unit_count()) {}

bool Network::has_frames() const {
    for (const auto& f : frames_)
        if (f) return true;
    return false;
}

bool Network::has_charts() const {
    for (const auto& c : charts_)
        if (!c.is_identity()) return true;
    return false;
}

void Network::set_chart(UnitId k, UnitChart chart) {
    if (k == kBiasUnit || k >= topology_.unit_count()) throw std::invalid_argument("set_chart: bad unit");
    if (topology_.is_output(k) && !chart.is_identity())
        throw std::invalid_argument("set_chart: output units keep the identity chart");
    if (chart.alpha == 0.0 || chart.gamma == 0.0) throw std::invalid_argument("set_chart: alpha and gamma must be nonzero");
    charts_[k] = chart;
}

void Network::set_frame(UnitId k, InputFrame frame) {
    if (k == kBiasUnit || k >= topology_.unit_count() || topology_.is_input(k))
        throw std::invalid_argument("set_frame: unit has no incoming parameters");
    const std::size_t d = topology_.incoming(k).size();
    if (frame.mix.rows() != d || frame.mix.cols() != d || frame.shift.size() != d)
        throw std::invalid_argument("set_frame: frame dimension differs from fan-in");
    frames_[k] = std::move(frame);
}

ParameterSet effective_weights(const Network& net, const ParameterSet& params) {
    if (!net.has_frames()) return params;
    ParameterSet eff = params;
    for (UnitId k : net.topology().trainable_units()) {
        const auto& frame = net.frame(k);
        if (!frame) continue;
        const auto theta = params.block(k);
        auto out = eff.block(k);
        const std::size_t d = theta.size() - 1;
        double bias = theta[0];
        for (std::size_t j = 0; j < d; ++j) bias += theta[j + 1] * frame->shift[j];
        out[0] = bias;
        for (std::size_t i = 0; i < d; ++i) {
            double w = 0.0;
            for (std::size_t j = 0; j < d; ++j) w += frame->mix(j, i) * theta[j + 1];
            out[i + 1] = w;
        }
    }
    return eff;
}

void unit_features(const Network& net, UnitId k, std::span<const double> activities, std::span<double> z) {
    const auto in = net.topology().incoming(k);
    z[0] = 1.0;
    const auto& frame = net.frame(k);
    if (!frame) {
        for (std::size_t j = 0; j < in.size(); ++j) z[j + 1] = activities[in[j]];
        return;
    }
    for (std::size_t j = 0; j < in.size(); ++j) {
        double s = frame->shift[j];
        for (std::size_t i = 0; i < in.size(); ++i) s += frame->mix(j, i) * activities[in[i]];
        z[j + 1] = s;
    }
}

}  // namespace invnet
