#include "omnidfa/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "omnidfa/boundary.hpp"
#include "omnidfa/config.hpp"
#include "omnidfa/encoder.hpp"
#include "omnidfa/error.hpp"
#include "omnidfa/synthdata.hpp"

namespace omnidfa {
namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << text;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::MalformedRecord, path.string() + " is not a result file");
    return doc;
}

std::string fixed(double v, int digits = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            const std::string cell = c < cells.size() ? cells[c] : "";
            if (c > 0) out << "  ";
            out << cell << std::string(width[c] - cell.size(), ' ');
        }
        out << '\n';
    };
    line(header);
    std::vector<std::string> rule;
    for (std::size_t w : width) rule.push_back(std::string(w, '-'));
    line(rule);
    for (const auto& row : rows) line(row);
    return out.str();
}

}  // namespace

Corruption Corruption::parse(std::string_view text) {
    if (text == "none" || text.empty()) return {};
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "corruption must be op:value");
    const auto op = text.substr(0, colon);
    const auto arg = text.substr(colon + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
    if (ec != std::errc() || ptr != arg.data() + arg.size() || arg.empty()) {
        throw Error(ErrorCode::InvalidArgument, "bad corruption value '" + std::string(arg) + "'");
    }
    Corruption c;
    c.value = value;
    if (op == "quantize") {
        if (!(value > 0.0)) throw Error(ErrorCode::InvalidArgument, "quantize levels must be positive");
        c.kind = CorruptionKind::Quantize;
    } else if (op == "smooth") {
        if (!(value >= 0.0)) throw Error(ErrorCode::InvalidArgument, "smooth sigma must be nonnegative");
        c.kind = CorruptionKind::Smooth;
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown corruption '" + std::string(op) + "'");
    }
    return c;
}

std::string Corruption::to_string() const {
    switch (kind) {
        case CorruptionKind::None: return "none";
        case CorruptionKind::Quantize: return "quantize:" + format_double(value);
        case CorruptionKind::Smooth: return "smooth:" + format_double(value);
    }
    return "none";
}

SignalGrid Corruption::apply(const SignalGrid& grid) const {
    switch (kind) {
        case CorruptionKind::None: return grid;
        case CorruptionKind::Quantize: return quantize(grid, value);
        case CorruptionKind::Smooth: return smooth(grid, value);
    }
    return grid;
}

FakeSelection parse_fake_selection(std::string_view text) {
    if (text == "auto") return FakeSelection::Auto;
    if (text == "unseen") return FakeSelection::Unseen;
    if (text == "seen") return FakeSelection::Seen;
    if (text == "all") return FakeSelection::All;
    throw Error(ErrorCode::InvalidArgument, "fake selection must be auto, unseen, seen or all");
}

DetectionResult evaluate_detection(const Checkpoint& checkpoint, std::span<const LabeledSample> samples,
                                   const Corruption& corruption, FakeSelection selection, std::size_t threads) {
    const auto& seen = checkpoint.training_classes;
    auto is_seen = [&](int id) { return std::find(seen.begin(), seen.end(), id) != seen.end(); };
    if (selection == FakeSelection::Auto) {
        const bool any_unseen = std::any_of(samples.begin(), samples.end(), [&](const LabeledSample& s) {
            return s.split == Split::Test && s.label.is_fake() && !is_seen(s.label.generator_id());
        });
        selection = any_unseen ? FakeSelection::Unseen : FakeSelection::All;
    }

    std::vector<const LabeledSample*> chosen;
    for (const auto& s : samples) {
        if (s.split != Split::Test) continue;
        if (s.label.is_fake()) {
            const bool known = is_seen(s.label.generator_id());
            if ((selection == FakeSelection::Unseen && known) || (selection == FakeSelection::Seen && !known)) continue;
        }
        chosen.push_back(&s);
    }

    std::vector<SignalGrid> corrupted;
    corrupted.reserve(chosen.size());
    for (const auto* s : chosen) corrupted.push_back(corruption.apply(s->grid));
    std::vector<const SignalGrid*> grids;
    for (const auto& g : corrupted) grids.push_back(&g);
    const auto embeddings = embed_grids(checkpoint.params, grids, threads);

    ScoredVerdicts scored;
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;  // hits, total
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const Decision d = classify(embeddings[i].values(), checkpoint.params.real_center, checkpoint.boundary);
        const bool truth = chosen[i]->label.is_fake();
        const bool verdict = d.verdict == Verdict::Fake;
        scored.scores.push_back(d.score);
        scored.truths.push_back(truth);
        scored.verdicts.push_back(verdict);
        auto& counts = per_class[chosen[i]->label.to_string()];
        counts.first += truth == verdict ? 1 : 0;
        ++counts.second;
    }

    DetectionResult result;
    result.corruption = corruption;
    result.accuracy = accuracy_suite(scored);
    result.ap = average_precision(scored.scores, scored.truths);
    for (bool t : scored.truths) (t ? result.fake_count : result.real_count) += 1;
    for (const auto& [name, counts] : per_class) {
        result.per_class_accuracy[name] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }
    return result;
}

std::string detection_result_to_string(const DetectionResult& r) {
    json doc;
    doc["kind"] = "detect";
    doc["corruption"] = r.corruption.to_string();
    doc["f_acc"] = r.accuracy.fake_acc;
    doc["r_acc"] = r.accuracy.real_acc;
    doc["acc"] = r.accuracy.acc;
    doc["ap"] = r.ap;
    doc["fake_count"] = r.fake_count;
    doc["real_count"] = r.real_count;
    doc["per_class_accuracy"] = r.per_class_accuracy;
    return doc.dump(1) + "\n";
}

void save_detection_result(const DetectionResult& result, const std::filesystem::path& path) {
    write_text(path, detection_result_to_string(result));
}

std::string fewshot_result_to_string(const FewShotReport& report) {
    json doc;
    doc["kind"] = "fewshot";
    doc["way"] = report.spec.way;
    doc["shot"] = report.spec.shot;
    doc["query"] = report.spec.query_per_class;
    doc["episodes"] = report.spec.episode_count;
    doc["seed"] = report.spec.seed;
    doc["mean_acc"] = report.result.mean_accuracy;
    doc["ci95"] = report.result.ci95;
    return doc.dump(1) + "\n";
}

void save_fewshot_result(const FewShotReport& report, const std::filesystem::path& path) {
    write_text(path, fewshot_result_to_string(report));
}

std::string render_detection_table(std::span<const DetectionResult> results) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : results) {
        rows.push_back({r.corruption.to_string(), fixed(r.accuracy.fake_acc), fixed(r.accuracy.real_acc),
                        fixed(r.accuracy.acc), fixed(r.ap)});
    }
    return render_table({"corruption", "F-Acc", "R-Acc", "Acc", "AP"}, rows);
}

std::string render_report(std::span<const std::filesystem::path> result_files) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& path : result_files) {
        const json doc = read_json(path);
        const std::string kind = doc.value("kind", "");
        const std::string name = path.filename().string();
        try {
            if (kind == "detect") {
                rows.push_back({name, "detect", doc.at("corruption").get<std::string>(), fixed(doc.at("f_acc").get<double>()),
                                fixed(doc.at("r_acc").get<double>()), fixed(doc.at("acc").get<double>()),
                                fixed(doc.at("ap").get<double>()), "", ""});
            } else if (kind == "fewshot") {
                const std::string setting = std::to_string(doc.at("way").get<std::size_t>()) + "-way " +
                                            std::to_string(doc.at("shot").get<std::size_t>()) + "-shot x" +
                                            std::to_string(doc.at("episodes").get<std::size_t>());
                rows.push_back({name, "fewshot", setting, "", "", "", "", fixed(doc.at("mean_acc").get<double>()),
                                fixed(doc.at("ci95").get<double>())});
            } else {
                throw Error(ErrorCode::MalformedRecord, path.string() + ": unknown result kind '" + kind + "'");
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what());
        }
    }
    return render_table({"file", "kind", "setting", "F-Acc", "R-Acc", "Acc", "AP", "FS-Acc", "CI95"}, rows);
}

}  // namespace omnidfa
