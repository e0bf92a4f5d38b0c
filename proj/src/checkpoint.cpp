#include "omnidfa/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "omnidfa/error.hpp"

namespace omnidfa {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "omnidfa-checkpoint";

}  // namespace

std::string checkpoint_to_string(const Checkpoint& checkpoint) {
    json doc;
    doc["format"] = kFormat;
    doc["version"] = Checkpoint::kVersion;
    doc["config"] = checkpoint.config.to_map();
    const EncoderShape shape = checkpoint.params.shape();
    doc["shape"] = {{"crop_size", shape.crop_size}, {"hidden_dim", shape.hidden_dim}, {"embed_dim", shape.embed_dim}};
    json tensors = json::object();
    checkpoint.params.for_each_tensor([&](std::string_view name, std::span<const double> t) {
        tensors[std::string(name)] = std::vector<double>(t.begin(), t.end());
    });
    doc["tensors"] = std::move(tensors);
    doc["boundary"] = {{"gamma", checkpoint.boundary.gamma},
                       {"beta", checkpoint.boundary.beta},
                       {"initialized", checkpoint.boundary.initialized}};
    doc["training_classes"] = checkpoint.training_classes;
    doc["rng_positions"] = checkpoint.rng_positions;
    return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::MalformedCheckpoint, "not a JSON document");
    try {
        if (doc.at("format") != kFormat || doc.at("version") != Checkpoint::kVersion) {
            throw Error(ErrorCode::MalformedCheckpoint, "unsupported checkpoint format or version");
        }
        Checkpoint cp;
        for (const auto& [key, value] : doc.at("config").items()) cp.config.set(key, value.get<std::string>());

        EncoderShape shape;
        shape.crop_size = doc.at("shape").at("crop_size").get<std::size_t>();
        shape.hidden_dim = doc.at("shape").at("hidden_dim").get<std::size_t>();
        shape.embed_dim = doc.at("shape").at("embed_dim").get<std::size_t>();
        cp.params = ParameterSet::zeros(shape);
        const json& tensors = doc.at("tensors");
        cp.params.for_each_tensor([&](std::string_view name, std::span<double> t) {
            const auto values = tensors.at(std::string(name)).get<std::vector<double>>();
            if (values.size() != t.size()) {
                throw Error(ErrorCode::MalformedCheckpoint, "tensor " + std::string(name) + " has wrong size");
            }
            std::copy(values.begin(), values.end(), t.begin());
        });

        const json& boundary = doc.at("boundary");
        cp.boundary.gamma = boundary.at("gamma").get<double>();
        cp.boundary.beta = boundary.at("beta").get<double>();
        cp.boundary.initialized = boundary.at("initialized").get<bool>();
        cp.training_classes = doc.at("training_classes").get<std::vector<int>>();
        cp.rng_positions = doc.at("rng_positions").get<std::map<std::string, std::uint64_t>>();
        return cp;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedCheckpoint, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedCheckpoint) throw;
        throw Error(ErrorCode::MalformedCheckpoint, e.what());
    }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write checkpoint " + path.string());
    out << checkpoint_to_string(checkpoint);
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open checkpoint " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return checkpoint_from_string(buffer.str());
}

}  // namespace omnidfa
