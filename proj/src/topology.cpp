#include "invnet/topology.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace invnet {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument("NetworkTopology: " + what); }

std::vector<UnitId> kahn_order(const std::vector<std::vector<UnitId>>& incoming) {
    const std::size_t n = incoming.size();
    std::vector<std::size_t> pending(n, 0);
    std::vector<std::vector<UnitId>> successors(n);
    for (UnitId k = 1; k < n; ++k) {
        pending[k] = incoming[k].size();
        for (UnitId i : incoming[k]) successors[i].push_back(k);
    }
    std::priority_queue<UnitId, std::vector<UnitId>, std::greater<>> ready;
    for (UnitId k = 1; k < n; ++k)
        if (pending[k] == 0) ready.push(k);
    std::vector<UnitId> order;
    order.reserve(n - 1);
    while (!ready.empty()) {
        const UnitId k = ready.top();
        ready.pop();
        order.push_back(k);
        for (UnitId j : successors[k])
            if (--pending[j] == 0) ready.push(j);
    }
    if (order.size() != n - 1) fail("graph contains a cycle");
    return order;
}

}  // namespace

NetworkTopology::NetworkTopology(std::size_t unit_count,
                                 std::vector<std::vector<UnitId>> incoming,
                                 std::vector<UnitId> inputs,
                                 std::vector<UnitId> outputs,
                                 std::vector<UnitId> order)
    : incoming_(std::move(incoming)), inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
    const std::size_t n = unit_count;
    if (n < 2) fail("needs at least one unit besides the bias unit");
    if (incoming_.size() != n) fail("incoming list count differs from unit count");
    if (!incoming_[kBiasUnit].empty()) fail("unit 0 is reserved and cannot have incoming edges");

    for (UnitId k = 1; k < n; ++k) {
        auto& in = incoming_[k];
        for (UnitId i : in) {
            if (i == kBiasUnit) fail("unit 0 is implicit and may not be listed as a source");
            if (i >= n) fail("source id out of range at unit " + std::to_string(k));
            if (i == k) fail("self loop at unit " + std::to_string(k));
        }
        std::vector<UnitId> sorted = in;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            fail("duplicate edge into unit " + std::to_string(k));
    }

    input_index_.assign(n, kNotAnOutput);
    output_index_.assign(n, kNotAnOutput);
    for (std::size_t idx = 0; idx < inputs_.size(); ++idx) {
        const UnitId k = inputs_[idx];
        if (k == kBiasUnit || k >= n) fail("invalid input unit id");
        if (input_index_[k] != kNotAnOutput) fail("input unit listed twice");
        if (!incoming_[k].empty()) fail("input unit " + std::to_string(k) + " has incoming edges");
        input_index_[k] = idx;
    }
    for (std::size_t idx = 0; idx < outputs_.size(); ++idx) {
        const UnitId k = outputs_[idx];
        if (k == kBiasUnit || k >= n) fail("invalid output unit id");
        if (output_index_[k] != kNotAnOutput) fail("output unit listed twice");
        if (input_index_[k] != kNotAnOutput) fail("unit cannot be both input and output");
        output_index_[k] = idx;
    }
    if (inputs_.empty()) fail("input layer is empty");
    if (outputs_.empty()) fail("output layer is empty");

    outgoing_.assign(n, {});
    for (UnitId k = 1; k < n; ++k)
        for (std::size_t s = 0; s < incoming_[k].size(); ++s)
            outgoing_[incoming_[k][s]].push_back({k, s + 1});
    for (UnitId k : outputs_)
        if (!outgoing_[k].empty()) fail("output unit " + std::to_string(k) + " has outgoing edges");

    if (order.empty()) {
        order_ = kahn_order(incoming_);
    } else {
        if (order.size() != n - 1) fail("order must list every unit except 0 exactly once");
        std::vector<std::size_t> position(n, kNotAnOutput);
        for (std::size_t p = 0; p < order.size(); ++p) {
            const UnitId k = order[p];
            if (k == kBiasUnit || k >= n || position[k] != kNotAnOutput) fail("order is not a permutation");
            position[k] = p;
        }
        for (UnitId k = 1; k < n; ++k)
            for (UnitId i : incoming_[k])
                if (position[i] > position[k]) fail("order is not topological");
        order_ = std::move(order);
    }
    for (UnitId k : order_)
        if (!is_input(k)) trainable_.push_back(k);
}

std::size_t NetworkTopology::edge_count() const {
    std::size_t e = 0;
    for (const auto& in : incoming_) e += in.size();
    return e;
}

std::size_t NetworkTopology::parameter_count() const {
    std::size_t p = 0;
    for (UnitId k : trainable_) p += incoming_[k].size() + 1;
    return p;
}

std::size_t NetworkTopology::max_fan_in() const {
    std::size_t d = 0;
    for (const auto& in : incoming_) d = std::max(d, in.size());
    return d;
}

NetworkTopology NetworkTopology::with_order(std::vector<UnitId> order) const {
    return NetworkTopology(unit_count(), incoming_, inputs_, outputs_, std::move(order));
}

}  // namespace invnet
