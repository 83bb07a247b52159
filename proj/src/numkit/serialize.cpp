#include "smoothfair/numkit/serialize.hpp"

#include <fstream>
#include <sstream>

#include "smoothfair/errors.hpp"

namespace smoothfair {

nlohmann::json network_to_json(const NetworkParams& net) {
    nlohmann::json j;
    j["layer_dims"] = net.layer_dims();
    auto activations = nlohmann::json::array();
    auto weights = nlohmann::json::array();
    auto biases = nlohmann::json::array();
    for (const auto& layer : net.layers()) {
        activations.push_back(to_string(layer.activation));
        weights.push_back(std::vector<double>(layer.weights.data(), layer.weights.data() + layer.weights.size()));
        biases.push_back(std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size()));
    }
    j["activations"] = activations;
    j["weights"] = weights;
    j["biases"] = biases;
    return j;
}

NetworkParams network_from_json(const nlohmann::json& j) {
    try {
        const auto dims = j.at("layer_dims").get<std::vector<std::size_t>>();
        const auto& acts = j.at("activations");
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        if (dims.size() < 2 || acts.size() + 1 != dims.size() || weights.size() + 1 != dims.size() ||
            biases.size() + 1 != dims.size()) {
            throw SchemaError("network json: layer counts disagree");
        }
        std::vector<Layer> layers;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            Layer layer;
            layer.activation = activation_from_string(acts[l].get<std::string>());
            const auto w = weights[l].get<std::vector<double>>();
            const auto b = biases[l].get<std::vector<double>>();
            if (w.size() != dims[l] * dims[l + 1] || b.size() != dims[l + 1]) {
                throw SchemaError("network json: layer " + std::to_string(l) + " has wrong parameter count");
            }
            layer.weights = Eigen::Map<const Matrix>(w.data(), static_cast<Eigen::Index>(dims[l + 1]),
                                                     static_cast<Eigen::Index>(dims[l]));
            layer.bias = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
            layers.push_back(std::move(layer));
        }
        return NetworkParams(std::move(layers));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("network json: ") + e.what());
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace smoothfair
