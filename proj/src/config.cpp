#include "omnidfa/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "omnidfa/error.hpp"

namespace omnidfa {
namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorCode::InvalidConfig, "key '" + key + "': cannot parse '" + text + "'");
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw Error(ErrorCode::InvalidConfig, "key '" + key + "': expected true/false, got '" + text + "'");
}

void require(bool condition, const std::string& message) {
    if (!condition) throw Error(ErrorCode::InvalidConfig, message);
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    (void)ec;
    return std::string(buf.data(), ptr);
}

void RunConfig::validate() const {
    require(embed_dim > 0 && embed_dim <= 128, "embed_dim must be in [1, 128]");
    require(hidden_dim > 0, "hidden_dim must be positive");
    require(crop_size > 0, "crop_size must be positive");
    require(temperature > 0.0, "temperature must be positive");
    require(lambda_center >= 0.0, "lambda_center must be nonnegative");
    require(momentum >= 0.0 && momentum < 1.0, "momentum must be in [0, 1)");
    require(fake_batch > 0 && real_batch > 0, "fake_batch and real_batch must be positive");
    require(fake_batch + real_batch >= 4, "fake_batch + real_batch must be at least 4");
    require(epochs > 0, "epochs must be positive");
    require(warmup_epochs < epochs, "warmup_epochs must be less than epochs");
    require(base_lr > 0.0, "base_lr must be positive");
    require(min_lr >= 0.0, "min_lr must be nonnegative");
    require(weight_decay >= 0.0, "weight_decay must be nonnegative");
    require(augment_prob >= 0.0 && augment_prob <= 1.0, "augment_prob must be in [0, 1]");
    require(quantize_min > 0.0 && quantize_min <= quantize_max, "quantize range must be positive and ordered");
    require(smooth_min >= 0.0 && smooth_min <= smooth_max, "smooth range must be nonnegative and ordered");
}

void RunConfig::set(const std::string& key, const std::string& value) {
    using Setter = std::function<void(RunConfig&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"embed_dim", [](RunConfig& c, const std::string& v) { c.embed_dim = parse_number<std::size_t>("embed_dim", v); }},
        {"hidden_dim", [](RunConfig& c, const std::string& v) { c.hidden_dim = parse_number<std::size_t>("hidden_dim", v); }},
        {"crop_size", [](RunConfig& c, const std::string& v) { c.crop_size = parse_number<std::size_t>("crop_size", v); }},
        {"temperature", [](RunConfig& c, const std::string& v) { c.temperature = parse_number<double>("temperature", v); }},
        {"lambda_center", [](RunConfig& c, const std::string& v) { c.lambda_center = parse_number<double>("lambda_center", v); }},
        {"momentum", [](RunConfig& c, const std::string& v) { c.momentum = parse_number<double>("momentum", v); }},
        {"fake_batch", [](RunConfig& c, const std::string& v) { c.fake_batch = parse_number<std::size_t>("fake_batch", v); }},
        {"real_batch", [](RunConfig& c, const std::string& v) { c.real_batch = parse_number<std::size_t>("real_batch", v); }},
        {"epochs", [](RunConfig& c, const std::string& v) { c.epochs = parse_number<std::size_t>("epochs", v); }},
        {"warmup_epochs", [](RunConfig& c, const std::string& v) { c.warmup_epochs = parse_number<std::size_t>("warmup_epochs", v); }},
        {"base_lr", [](RunConfig& c, const std::string& v) { c.base_lr = parse_number<double>("base_lr", v); }},
        {"min_lr", [](RunConfig& c, const std::string& v) { c.min_lr = parse_number<double>("min_lr", v); }},
        {"weight_decay", [](RunConfig& c, const std::string& v) { c.weight_decay = parse_number<double>("weight_decay", v); }},
        {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
        {"augment", [](RunConfig& c, const std::string& v) { c.augment = parse_bool("augment", v); }},
        {"augment_prob", [](RunConfig& c, const std::string& v) { c.augment_prob = parse_number<double>("augment_prob", v); }},
        {"quantize_min", [](RunConfig& c, const std::string& v) { c.quantize_min = parse_number<double>("quantize_min", v); }},
        {"quantize_max", [](RunConfig& c, const std::string& v) { c.quantize_max = parse_number<double>("quantize_max", v); }},
        {"smooth_min", [](RunConfig& c, const std::string& v) { c.smooth_min = parse_number<double>("smooth_min", v); }},
        {"smooth_max", [](RunConfig& c, const std::string& v) { c.smooth_max = parse_number<double>("smooth_max", v); }},
        {"boundary_cadence",
         [](RunConfig& c, const std::string& v) {
             if (v == "batch") c.boundary_cadence = BoundaryCadence::PerBatch;
             else if (v == "epoch") c.boundary_cadence = BoundaryCadence::PerEpoch;
             else throw Error(ErrorCode::InvalidConfig, "boundary_cadence must be batch or epoch");
         }},
        {"fake_sampling",
         [](RunConfig& c, const std::string& v) {
             if (v == "uniform") c.fake_sampling = FakeSampling::Uniform;
             else if (v == "stratified") c.fake_sampling = FakeSampling::Stratified;
             else throw Error(ErrorCode::InvalidConfig, "fake_sampling must be uniform or stratified");
         }},
        {"supcon_denominator",
         [](RunConfig& c, const std::string& v) {
             if (v == "all_but_anchor") c.denominator = DenominatorSet::AllButAnchor;
             else if (v == "positives_only") c.denominator = DenominatorSet::PositivesOnly;
             else throw Error(ErrorCode::InvalidConfig, "supcon_denominator must be all_but_anchor or positives_only");
         }},
    };
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
    it->second(*this, value);
}

std::map<std::string, std::string> RunConfig::to_map() const {
    return {
        {"embed_dim", std::to_string(embed_dim)},
        {"hidden_dim", std::to_string(hidden_dim)},
        {"crop_size", std::to_string(crop_size)},
        {"temperature", format_double(temperature)},
        {"lambda_center", format_double(lambda_center)},
        {"momentum", format_double(momentum)},
        {"fake_batch", std::to_string(fake_batch)},
        {"real_batch", std::to_string(real_batch)},
        {"epochs", std::to_string(epochs)},
        {"warmup_epochs", std::to_string(warmup_epochs)},
        {"base_lr", format_double(base_lr)},
        {"min_lr", format_double(min_lr)},
        {"weight_decay", format_double(weight_decay)},
        {"seed", std::to_string(seed)},
        {"augment", augment ? "true" : "false"},
        {"augment_prob", format_double(augment_prob)},
        {"quantize_min", format_double(quantize_min)},
        {"quantize_max", format_double(quantize_max)},
        {"smooth_min", format_double(smooth_min)},
        {"smooth_max", format_double(smooth_max)},
        {"boundary_cadence", boundary_cadence == BoundaryCadence::PerBatch ? "batch" : "epoch"},
        {"fake_sampling", fake_sampling == FakeSampling::Uniform ? "uniform" : "stratified"},
        {"supcon_denominator", denominator == DenominatorSet::AllButAnchor ? "all_but_anchor" : "positives_only"},
    };
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    config.validate();
    return config;
}

void save_run_config(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write config " + path.string());
    for (const auto& [key, value] : config.to_map()) out << key << " = " << value << '\n';
}

}  // namespace omnidfa
