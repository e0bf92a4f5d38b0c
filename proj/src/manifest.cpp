#include "omnidfa/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "omnidfa/error.hpp"

namespace omnidfa {
namespace {

using nlohmann::json;

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
    throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + what);
}

std::size_t header_size(const json& header, const char* key, std::size_t line_no) {
    if (!header.contains(key) || !header[key].is_number_unsigned()) {
        malformed(line_no, std::string("header field '") + key + "' missing or not a nonnegative integer");
    }
    return header[key].get<std::size_t>();
}

void check_label(const ClassLabel& label, std::size_t generator_count, const std::string& where) {
    if (label.is_fake() && static_cast<std::size_t>(label.generator_id()) >= generator_count) {
        throw Error(ErrorCode::UnknownGenerator, where + ": generator " + std::to_string(label.generator_id()) +
                                                     " >= generator_count " + std::to_string(generator_count));
    }
}

}  // namespace

void validate_manifest(const Manifest& manifest) {
    std::unordered_set<std::string> ids;
    for (const auto& s : manifest.samples) {
        if (!ids.insert(s.id).second) throw Error(ErrorCode::DuplicateId, "duplicate id '" + s.id + "'");
        check_label(s.label, manifest.generator_count, "sample '" + s.id + "'");
        if (s.grid.height() != manifest.grid_height || s.grid.width() != manifest.grid_width) {
            throw Error(ErrorCode::MalformedRecord, "sample '" + s.id + "' grid shape differs from header");
        }
    }
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open manifest " + path.string());

    Manifest manifest;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) malformed(line_no, "not a JSON object");

        if (!have_header) {
            if (!record.contains("version") || record["version"] != Manifest::kVersion) {
                malformed(line_no, "unsupported or missing manifest version");
            }
            manifest.generator_count = header_size(record, "generator_count", line_no);
            manifest.grid_height = header_size(record, "grid_height", line_no);
            manifest.grid_width = header_size(record, "grid_width", line_no);
            if (manifest.grid_height == 0 || manifest.grid_width == 0) malformed(line_no, "grid dimensions must be positive");
            have_header = true;
            continue;
        }

        LabeledSample sample;
        try {
            sample.id = record.at("id").get<std::string>();
            sample.label = ClassLabel::parse(record.at("label").get<std::string>());
            sample.split = parse_split(record.at("split").get<std::string>());
            auto values = record.at("values").get<std::vector<double>>();
            sample.grid = SignalGrid(manifest.grid_height, manifest.grid_width, std::move(values));
        } catch (const json::exception& e) {
            malformed(line_no, e.what());
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InvalidArgument) throw;
            malformed(line_no, e.what());
        }
        check_label(sample.label, manifest.generator_count, "line " + std::to_string(line_no));
        if (!ids.insert(sample.id).second) {
            throw Error(ErrorCode::DuplicateId, "line " + std::to_string(line_no) + ": duplicate id '" + sample.id + "'");
        }
        manifest.samples.push_back(std::move(sample));
    }
    if (!have_header) malformed(line_no, "missing header");
    return manifest;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    validate_manifest(manifest);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write manifest " + path.string());
    const json header = {{"version", Manifest::kVersion},
                         {"generator_count", manifest.generator_count},
                         {"grid_height", manifest.grid_height},
                         {"grid_width", manifest.grid_width}};
    out << header.dump() << '\n';
    for (const auto& s : manifest.samples) {
        json record;
        record["id"] = s.id;
        record["label"] = s.label.to_string();
        record["split"] = std::string(to_string(s.split));
        record["values"] = std::vector<double>(s.grid.values().begin(), s.grid.values().end());
        out << record.dump() << '\n';
    }
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace omnidfa
