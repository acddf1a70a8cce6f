#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "invnet/linalg.hpp"
#include "invnet/topology.hpp"

namespace invnet {

enum class ActivationKind { sigmoid, tanh };

enum class Interpretation { square_loss, bernoulli, softmax, spherical };

std::string_view to_string(ActivationKind kind);
std::string_view to_string(Interpretation kind);
ActivationKind parse_activation(std::string_view name);
Interpretation parse_interpretation(std::string_view name);

/// Affine chart of a unit's activity: a_k = alpha * s(gamma * y_k) + beta, with
/// y_k the affine combination of incoming activities. Input units use
/// a_k = alpha * x_k + beta. The identity chart is (1, 0, 1).
struct UnitChart {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 1.0;

    bool is_identity() const { return alpha == 1.0 && beta == 0.0 && gamma == 1.0; }
};

/// Invertible affine recombination of the incoming activity vector of a unit:
/// the unit's weights act on z = mix * a_E + shift instead of a_E.
struct InputFrame {
    Matrix mix;
    std::vector<double> shift;
};

/// Per-unit parameter blocks theta_k = (w_0k, w_{i k} for i in E_k), stored
/// contiguously. Blocks of input units are empty. Also used for any vector in
/// parameter space (gradients, update directions).
class ParameterSet {
public:
    ParameterSet() = default;
    explicit ParameterSet(const NetworkTopology& topology);

    std::size_t size() const { return values_.size(); }
    std::size_t unit_count() const { return offsets_.size() - 1; }

    std::span<double> block(UnitId k) { return {values_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]}; }
    std::span<const double> block(UnitId k) const {
        return {values_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
    }
    std::size_t offset(UnitId k) const { return offsets_[k]; }

    /// Slot 0 is the bias w_0k; slot s >= 1 the weight from incoming(k)[s-1].
    double& at(UnitId k, std::size_t slot) { return values_[offsets_[k] + slot]; }
    double at(UnitId k, std::size_t slot) const { return values_[offsets_[k] + slot]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// this += eta * direction
    void add_scaled(const ParameterSet& direction, double eta);

    bool same_shape(const ParameterSet& other) const { return offsets_ == other.offsets_; }
    bool operator==(const ParameterSet& other) const = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<double> values_;
};

/// Topology plus everything that fixes how parameters map to activities:
/// the activation function, per-unit charts and recombination frames, and the
/// output interpretation.
class Network {
public:
    Network(NetworkTopology topology, ActivationKind activation, Interpretation interpretation);

    const NetworkTopology& topology() const { return topology_; }
    ActivationKind activation() const { return activation_; }
    Interpretation interpretation() const { return interpretation_; }

    const UnitChart& chart(UnitId k) const { return charts_[k]; }
    const std::optional<InputFrame>& frame(UnitId k) const { return frames_[k]; }
    bool has_frames() const;
    bool has_charts() const;

    void set_chart(UnitId k, UnitChart chart);
    void set_frame(UnitId k, InputFrame frame);
    void set_interpretation(Interpretation interpretation) { interpretation_ = interpretation; }

    /// Output activities are decoded to u = offset + slope * a before interpretation:
    /// identity for sigmoid, (1 + a) / 2 for tanh.
    double output_slope() const { return activation_ == ActivationKind::tanh ? 0.5 : 1.0; }
    double output_offset() const { return activation_ == ActivationKind::tanh ? 0.5 : 0.0; }

private:
    NetworkTopology topology_;
    ActivationKind activation_;
    Interpretation interpretation_;
    std::vector<UnitChart> charts_;
    std::vector<std::optional<InputFrame>> frames_;
};

/// Weights acting directly on the incoming activities: equal to the parameters
/// unless the unit carries an InputFrame, in which case the bias absorbs
/// theta_w . shift and the weights become mix^T theta_w.
ParameterSet effective_weights(const Network& net, const ParameterSet& params);

/// Feature vector z = (1, a_E) or (1, mix a_E + shift) seen by unit k's parameters.
void unit_features(const Network& net, UnitId k, std::span<const double> activities, std::span<double> z);

}  // namespace invnet
