#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace invnet {

using UnitId = std::size_t;

/// The always-activated unit carrying biases (a_0 = 1).
inline constexpr UnitId kBiasUnit = 0;
inline constexpr std::size_t kNotAnOutput = std::numeric_limits<std::size_t>::max();

/// Edge k -> to, where `slot` is the position of w_{k,to} inside the incoming
/// parameter block of `to` (slot 0 is the bias).
struct OutgoingEdge {
    UnitId to;
    std::size_t slot;
};

/// Immutable DAG of scalar units. Unit 0 is reserved for the bias and never
/// appears in an edge list. Input units have no incoming edges, output units
/// no outgoing ones.
class NetworkTopology {
public:
    NetworkTopology() = default;

    /// `incoming[k]` lists E_k for every unit id (incoming[0] and input lists empty).
    /// If `order` is empty a topological order is derived (Kahn, smallest id first).
    NetworkTopology(std::size_t unit_count,
                    std::vector<std::vector<UnitId>> incoming,
                    std::vector<UnitId> inputs,
                    std::vector<UnitId> outputs,
                    std::vector<UnitId> order = {});

    std::size_t unit_count() const { return incoming_.size(); }
    std::span<const UnitId> order() const { return order_; }
    std::span<const UnitId> trainable_units() const { return trainable_; }
    std::span<const UnitId> incoming(UnitId k) const { return incoming_[k]; }
    std::span<const OutgoingEdge> outgoing(UnitId k) const { return outgoing_[k]; }
    std::span<const UnitId> inputs() const { return inputs_; }
    std::span<const UnitId> outputs() const { return outputs_; }

    bool is_input(UnitId k) const { return input_index_[k] != kNotAnOutput; }
    bool is_output(UnitId k) const { return output_index_[k] != kNotAnOutput; }
    std::size_t input_index(UnitId k) const { return input_index_[k]; }
    std::size_t output_index(UnitId k) const { return output_index_[k]; }

    std::size_t edge_count() const;
    /// Total number of parameters: sum over trainable units of |E_k| + 1.
    std::size_t parameter_count() const;
    std::size_t max_fan_in() const;

    /// Same graph, different (still topological) evaluation order.
    NetworkTopology with_order(std::vector<UnitId> order) const;

private:
    std::vector<std::vector<UnitId>> incoming_;
    std::vector<std::vector<OutgoingEdge>> outgoing_;
    std::vector<UnitId> order_;
    std::vector<UnitId> trainable_;
    std::vector<UnitId> inputs_;
    std::vector<UnitId> outputs_;
    std::vector<std::size_t> input_index_;
    std::vector<std::size_t> output_index_;
};

}  // namespace invnet
