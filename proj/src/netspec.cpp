#include "invnet/netspec.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace invnet {

namespace {
constexpr std::string_view kSchema = "invnet.network";
constexpr int kVersion = 1;
}  // namespace

Network parse_network_spec(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("network spec: ") + e.what());
    }
    if (j.value("schema", std::string()) != kSchema) throw std::invalid_argument("network spec: wrong schema");
    if (j.value("version", 0) != kVersion)
        throw std::invalid_argument("network spec: unsupported version " + std::to_string(j.value("version", 0)));
    const auto units = j.at("units").get<std::size_t>();
    std::vector<std::vector<UnitId>> incoming(units);
    for (const auto& e : j.at("edges")) {
        const auto k = e.at("unit").get<UnitId>();
        if (k >= units) throw std::invalid_argument("network spec: edge target out of range");
        incoming[k] = e.at("from").get<std::vector<UnitId>>();
    }
    NetworkTopology topo(units, std::move(incoming), j.at("input_layer").get<std::vector<UnitId>>(),
                         j.at("output_layer").get<std::vector<UnitId>>());
    return Network(std::move(topo), parse_activation(j.value("activation", std::string("sigmoid"))),
                   parse_interpretation(j.value("interpretation", std::string("bernoulli"))));
}

std::string network_spec_json(const Network& net) {
    const auto& topo = net.topology();
    nlohmann::ordered_json j;
    j["schema"] = kSchema;
    j["version"] = kVersion;
    j["units"] = topo.unit_count();
    j["input_layer"] = std::vector<UnitId>(topo.inputs().begin(), topo.inputs().end());
    j["output_layer"] = std::vector<UnitId>(topo.outputs().begin(), topo.outputs().end());
    auto edges = nlohmann::ordered_json::array();
    for (UnitId k = 0; k < topo.unit_count(); ++k) {
        if (topo.incoming(k).empty()) continue;
        nlohmann::ordered_json e;
        e["unit"] = k;
        e["from"] = std::vector<UnitId>(topo.incoming(k).begin(), topo.incoming(k).end());
        edges.push_back(std::move(e));
    }
    j["edges"] = std::move(edges);
    j["activation"] = std::string(to_string(net.activation()));
    j["interpretation"] = std::string(to_string(net.interpretation()));
    return j.dump(2);
}

Network load_network_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network spec '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network_spec(ss.str());
}

void save_network_spec(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write network spec '" + path + "'");
    out << network_spec_json(net) << '\n';
}

}  // namespace invnet
