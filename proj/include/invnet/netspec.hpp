#pragma once

#include <string>
#include <string_view>

#include "invnet/network.hpp"

namespace invnet {

/// JSON network description:
/// {"schema": "invnet.network", "version": 1, "units": N,
///  "input_layer": [...], "output_layer": [...],
///  "edges": [{"unit": k, "from": [i, ...]}, ...],
///  "activation": "sigmoid"|"tanh", "interpretation": "bernoulli"|...}
Network parse_network_spec(std::string_view text);
std::string network_spec_json(const Network& net);

Network load_network_spec(const std::string& path);
void save_network_spec(const Network& net, const std::string& path);

}  // namespace invnet
