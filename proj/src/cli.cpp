#include "omnidfa/cli.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "omnidfa/checkpoint.hpp"
#include "omnidfa/error.hpp"
#include "omnidfa/evaluation.hpp"
#include "omnidfa/fewshot.hpp"
#include "omnidfa/manifest.hpp"
#include "omnidfa/trainer.hpp"

namespace omnidfa {
namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::filesystem::path sidecar(const std::filesystem::path& path, const char* suffix) {
    return std::filesystem::path(path.string() + suffix);
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        double v = 0.0;
        const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || end != item.data() + item.size()) {
            throw CLI::ValidationError("--values", "not a number: '" + item + "'");
        }
        values.push_back(v);
    }
    if (values.empty()) throw CLI::ValidationError("--values", "empty list");
    return values;
}

struct SynthArgs {
    std::string out;
    std::string meta;
    SimulatorConfig sim;
    std::size_t grid = 32;
    std::size_t folds = 3;
};

struct TrainArgs {
    std::string config;
    std::string manifest;
    std::string out;
    std::string report;
    std::string meta;
    int holdout_fold = -1;
    std::optional<std::size_t> epochs;
    std::optional<std::uint64_t> seed;
    std::optional<double> lr;
    bool quiet = false;
};

struct EvalArgs {
    std::string checkpoint;
    std::string manifest;
    std::string corrupt = "none";
    std::string fakes = "auto";
    std::string out;
    std::size_t threads = 1;
};

struct FewShotArgs {
    std::string checkpoint;
    std::string manifest;
    EpisodeSpec spec;
    std::string out;
    std::size_t threads = 1;
};

struct SweepArgs {
    std::string checkpoint;
    std::string manifest;
    std::string op;
    std::string values;
    std::string fakes = "auto";
    std::string out;
    std::string out_dir;
    std::size_t threads = 1;
};

struct ReportArgs {
    std::vector<std::string> files;
    std::string out;
};

int cmd_synth(const SynthArgs& a) {
    SimulatorConfig sim = a.sim;
    sim.grid_height = sim.grid_width = a.grid;
    sim.validate();
    const Manifest manifest = generate_dataset(sim);
    save_manifest(manifest, a.out);

    DatasetMeta meta;
    meta.simulator = sim;
    meta.fold_seed = sim.seed;
    meta.folds = split_folds(sim.generator_count, a.folds, sim.seed);
    const auto meta_path = a.meta.empty() ? sidecar(a.out, ".meta.json") : std::filesystem::path(a.meta);
    save_dataset_meta(meta, meta_path);
    std::cout << "wrote " << manifest.samples.size() << " samples to " << a.out << "\n";
    return 0;
}

int cmd_train(const TrainArgs& a) {
    RunConfig config = a.config.empty() ? RunConfig{} : load_run_config(a.config);
    if (a.epochs) config.epochs = *a.epochs;
    if (a.seed) config.seed = *a.seed;
    if (a.lr) config.base_lr = *a.lr;
    config.validate();

    const Manifest manifest = load_manifest(a.manifest);
    std::set<int> held_out;
    if (a.holdout_fold >= 0) {
        const auto meta_path = a.meta.empty() ? sidecar(a.manifest, ".meta.json") : std::filesystem::path(a.meta);
        const DatasetMeta meta = load_dataset_meta(meta_path);
        const auto fold = static_cast<std::size_t>(a.holdout_fold);
        if (fold >= meta.folds.fold_count()) {
            throw Error(ErrorCode::InvalidArgument, "--holdout-fold out of range");
        }
        held_out.insert(meta.folds.folds[fold].begin(), meta.folds.folds[fold].end());
    }

    std::vector<LabeledSample> train_set;
    for (const auto& s : manifest.samples) {
        if (s.split != Split::Train) continue;
        if (s.label.is_fake() && held_out.contains(s.label.generator_id())) continue;
        train_set.push_back(s);
    }

    auto progress = [&](const EpochRecord& e) {
        if (a.quiet) return;
        std::printf("epoch %zu L_sup %.6f L_cen %.6f gamma %.6f lr %.3e\n", e.epoch, e.mean_supcon, e.mean_center,
                    e.gamma, e.lr);
        std::fflush(stdout);
    };
    TrainResult result = train(config, train_set, progress);
    save_checkpoint(result.checkpoint, a.out);
    result.report.checkpoint_path = std::filesystem::path(a.out).filename().string();
    save_train_report(result.report, a.report.empty() ? sidecar(a.out, ".report.json") : std::filesystem::path(a.report));
    return 0;
}

int cmd_detect(const EvalArgs& a) {
    const Checkpoint cp = load_checkpoint(a.checkpoint);
    const Manifest manifest = load_manifest(a.manifest);
    const auto result = evaluate_detection(cp, manifest.samples, Corruption::parse(a.corrupt),
                                           parse_fake_selection(a.fakes), a.threads);
    const std::string text = detection_result_to_string(result);
    if (!a.out.empty()) write_text(a.out, text);
    std::cout << text;
    return 0;
}

int cmd_fewshot(const FewShotArgs& a) {
    a.spec.validate();
    const Checkpoint cp = load_checkpoint(a.checkpoint);
    const Manifest manifest = load_manifest(a.manifest);
    FewShotReport report{a.spec, run_episodes(cp, manifest.samples, a.spec, a.threads)};
    const std::string text = fewshot_result_to_string(report);
    if (!a.out.empty()) write_text(a.out, text);
    std::cout << text;
    return 0;
}

int cmd_sweep(const SweepArgs& a) {
    if (a.op != "quantize" && a.op != "smooth") {
        throw Error(ErrorCode::InvalidArgument, "--op must be quantize or smooth");
    }
    const auto values = parse_values(a.values);
    const Checkpoint cp = load_checkpoint(a.checkpoint);
    const Manifest manifest = load_manifest(a.manifest);
    const auto selection = parse_fake_selection(a.fakes);

    std::vector<DetectionResult> results;
    results.push_back(evaluate_detection(cp, manifest.samples, {}, selection, a.threads));
    for (const double v : values) {
        const auto c = Corruption::parse(a.op + ":" + format_double(v));
        results.push_back(evaluate_detection(cp, manifest.samples, c, selection, a.threads));
    }
    if (!a.out_dir.empty()) {
        std::filesystem::create_directories(a.out_dir);
        for (const auto& r : results) {
            std::string name = r.corruption.to_string();
            for (char& ch : name) {
                if (ch == ':') ch = '_';
            }
            save_detection_result(r, std::filesystem::path(a.out_dir) / ("detect_" + name + ".json"));
        }
    }
    const std::string table = render_detection_table(results);
    if (!a.out.empty()) write_text(a.out, table);
    std::cout << table;
    return 0;
}

int cmd_report(const ReportArgs& a) {
    std::vector<std::filesystem::path> paths(a.files.begin(), a.files.end());
    const std::string table = render_report(paths);
    if (!a.out.empty()) write_text(a.out, table);
    std::cout << table;
    return 0;
}

}  // namespace

void save_dataset_meta(const DatasetMeta& meta, const std::filesystem::path& path) {
    const auto& s = meta.simulator;
    json doc;
    doc["kind"] = "synth-meta";
    doc["simulator"] = {{"generator_count", s.generator_count},
                        {"fingerprint_strength", s.fingerprint_strength},
                        {"noise_sigma", s.noise_sigma},
                        {"base_smoothness", s.base_smoothness},
                        {"base_amplitude", s.base_amplitude},
                        {"fingerprint_period", s.fingerprint_period},
                        {"grid_height", s.grid_height},
                        {"grid_width", s.grid_width},
                        {"train_per_class", s.train_per_class},
                        {"test_per_class", s.test_per_class},
                        {"seed", s.seed}};
    doc["fold_seed"] = meta.fold_seed;
    doc["folds"] = meta.folds.folds;
    write_text(path, doc.dump(1) + "\n");
}

DatasetMeta load_dataset_meta(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    try {
        const json doc = json::parse(in);
        DatasetMeta meta;
        const auto& s = doc.at("simulator");
        meta.simulator.generator_count = s.at("generator_count").get<std::size_t>();
        meta.simulator.fingerprint_strength = s.at("fingerprint_strength").get<double>();
        meta.simulator.noise_sigma = s.at("noise_sigma").get<double>();
        meta.simulator.base_smoothness = s.at("base_smoothness").get<double>();
        meta.simulator.base_amplitude = s.at("base_amplitude").get<double>();
        meta.simulator.fingerprint_period = s.at("fingerprint_period").get<std::size_t>();
        meta.simulator.grid_height = s.at("grid_height").get<std::size_t>();
        meta.simulator.grid_width = s.at("grid_width").get<std::size_t>();
        meta.simulator.train_per_class = s.at("train_per_class").get<std::size_t>();
        meta.simulator.test_per_class = s.at("test_per_class").get<std::size_t>();
        meta.simulator.seed = s.at("seed").get<std::uint64_t>();
        meta.fold_seed = doc.at("fold_seed").get<std::uint64_t>();
        meta.folds.folds = doc.at("folds").get<std::vector<std::vector<int>>>();
        return meta;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what());
    }
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Open-set synthetic signal forensics toolkit", "omnidfa"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth-data", "Generate a synthetic manifest and fold metadata");
    s->add_option("--out", synth.out, "Manifest path")->required();
    s->add_option("--meta", synth.meta, "Metadata path (default: <out>.meta.json)");
    s->add_option("--classes", synth.sim.generator_count, "Generator classes")->capture_default_str();
    s->add_option("--seed", synth.sim.seed, "Simulator seed")->capture_default_str();
    s->add_option("--alpha", synth.sim.fingerprint_strength, "Fingerprint strength")->capture_default_str();
    s->add_option("--noise", synth.sim.noise_sigma, "Noise sigma")->capture_default_str();
    s->add_option("--base-smoothness", synth.sim.base_smoothness, "Base field smoothing sigma")->capture_default_str();
    s->add_option("--base-amplitude", synth.sim.base_amplitude, "Base field std")->capture_default_str();
    s->add_option("--period", synth.sim.fingerprint_period, "Fingerprint tile size")->capture_default_str();
    s->add_option("--grid", synth.grid, "Grid side length")->capture_default_str();
    s->add_option("--train-per-class", synth.sim.train_per_class, "Train samples per class")->capture_default_str();
    s->add_option("--test-per-class", synth.sim.test_per_class, "Test samples per class")->capture_default_str();
    s->add_option("--folds", synth.folds, "Class folds")->capture_default_str();

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train an encoder; flags override the config file");
    t->add_option("--config", tr.config, "Run config (key = value lines)")->check(CLI::ExistingFile);
    t->add_option("--manifest", tr.manifest, "Training manifest")->required()->check(CLI::ExistingFile);
    t->add_option("--out", tr.out, "Checkpoint path")->required();
    t->add_option("--report", tr.report, "Report path (default: <out>.report.json)");
    t->add_option("--holdout-fold", tr.holdout_fold, "Exclude this fold's generators from training");
    t->add_option("--meta", tr.meta, "Fold metadata (default: <manifest>.meta.json)");
    t->add_option("--epochs", tr.epochs, "Override epochs");
    t->add_option("--seed", tr.seed, "Override seed");
    t->add_option("--lr", tr.lr, "Override base learning rate");
    t->add_flag("--quiet", tr.quiet, "No per-epoch progress lines");

    EvalArgs ev;
    auto* d = app.add_subcommand("eval-detect", "Real/fake detection on the test split");
    d->add_option("--checkpoint", ev.checkpoint)->required()->check(CLI::ExistingFile);
    d->add_option("--manifest", ev.manifest)->required()->check(CLI::ExistingFile);
    d->add_option("--corrupt", ev.corrupt, "none | quantize:<q> | smooth:<sigma>")->capture_default_str();
    d->add_option("--fakes", ev.fakes, "auto | unseen | seen | all")->capture_default_str();
    d->add_option("--out", ev.out, "Result file");
    d->add_option("--threads", ev.threads)->capture_default_str()->check(CLI::PositiveNumber);

    FewShotArgs fs;
    auto* f = app.add_subcommand("eval-fewshot", "Episodic few-shot attribution on unseen generators");
    f->add_option("--checkpoint", fs.checkpoint)->required()->check(CLI::ExistingFile);
    f->add_option("--manifest", fs.manifest)->required()->check(CLI::ExistingFile);
    f->add_option("--way", fs.spec.way)->capture_default_str();
    f->add_option("--shot", fs.spec.shot)->capture_default_str();
    f->add_option("--query", fs.spec.query_per_class)->capture_default_str();
    f->add_option("--episodes", fs.spec.episode_count)->capture_default_str();
    f->add_option("--seed", fs.spec.seed)->capture_default_str();
    f->add_option("--out", fs.out, "Result file");
    f->add_option("--threads", fs.threads)->capture_default_str()->check(CLI::PositiveNumber);

    SweepArgs sw;
    auto* r = app.add_subcommand("robust-sweep", "Detection across corruption severities");
    r->add_option("--checkpoint", sw.checkpoint)->required()->check(CLI::ExistingFile);
    r->add_option("--manifest", sw.manifest)->required()->check(CLI::ExistingFile);
    r->add_option("--op", sw.op, "quantize | smooth")->required();
    r->add_option("--values", sw.values, "Comma-separated severities")->required();
    r->add_option("--fakes", sw.fakes, "auto | unseen | seen | all")->capture_default_str();
    r->add_option("--out", sw.out, "Table file");
    r->add_option("--out-dir", sw.out_dir, "Also write one result file per severity here");
    r->add_option("--threads", sw.threads)->capture_default_str()->check(CLI::PositiveNumber);

    ReportArgs rep;
    auto* p = app.add_subcommand("report", "Merge result files into one table");
    p->add_option("files", rep.files, "Result files")->required()->check(CLI::ExistingFile);
    p->add_option("--out", rep.out, "Table file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        std::cout << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return 2;
    }

    try {
        if (s->parsed()) return cmd_synth(synth);
        if (t->parsed()) return cmd_train(tr);
        if (d->parsed()) return cmd_detect(ev);
        if (f->parsed()) return cmd_fewshot(fs);
        if (r->parsed()) return cmd_sweep(sw);
        return cmd_report(rep);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"omnidfa"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace omnidfa
