#include "omnidfa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "omnidfa/boundary.hpp"
#include "omnidfa/encoder.hpp"
#include "omnidfa/error.hpp"
#include "omnidfa/losses.hpp"
#include "omnidfa/optimizer.hpp"
#include "omnidfa/synthdata.hpp"

namespace omnidfa {
namespace {

// Draws `count` distinct entries of `pool` (partial Fisher-Yates on a copy).
std::vector<std::size_t> draw_distinct(std::vector<std::size_t> pool, std::size_t count, RandomStream& rng) {
    for (std::size_t k = 0; k < count; ++k) {
        const auto j = k + static_cast<std::size_t>(rng.index(pool.size() - k));
        std::swap(pool[k], pool[j]);
    }
    pool.resize(count);
    return pool;
}

struct EncodedBatch {
    std::vector<ForwardCache> caches;
    Matrix z;
    std::vector<ClassLabel> labels;
};

EncodedBatch encode(const ParameterSet& params, std::span<const LabeledSample> samples,
                    std::span<const std::size_t> indices, const RunConfig& config, RandomStream* augment_rng,
                    RandomStream* view_rng) {
    EncodedBatch batch;
    batch.z = Matrix(indices.size(), config.embed_dim);
    for (std::size_t row = 0; row < indices.size(); ++row) {
        const LabeledSample& sample = samples[indices[row]];
        ViewPair views;
        if (augment_rng != nullptr) {
            const SignalGrid grid = config.augment ? augment_grid(sample.grid, config, *augment_rng) : sample.grid;
            views = make_views(grid, config.crop_size, ViewMode::TrainRandom, view_rng);
        } else {
            views = make_views(sample.grid, config.crop_size, ViewMode::EvalCenter);
        }
        batch.caches.push_back(forward(params, views));
        std::copy(batch.caches.back().embedding.begin(), batch.caches.back().embedding.end(), batch.z.row(row).begin());
        batch.labels.push_back(sample.label);
    }
    return batch;
}

std::vector<double> real_deviations(const EncodedBatch& batch, std::span<const double> center) {
    std::vector<double> out;
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
        if (batch.labels[i].is_real()) out.push_back(deviation(batch.z.row(i), center));
    }
    return out;
}

}  // namespace

BatchComposer::BatchComposer(std::span<const LabeledSample> train_set) {
    std::map<int, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
        if (train_set[i].label.is_real()) {
            reals_.push_back(i);
        } else {
            fakes_.push_back(i);
            classes[train_set[i].label.generator_id()].push_back(i);
        }
    }
    by_class_.assign(classes.begin(), classes.end());
}

std::vector<int> BatchComposer::fake_classes() const {
    std::vector<int> ids;
    for (const auto& [id, members] : by_class_) ids.push_back(id);
    return ids;
}

std::vector<std::size_t> BatchComposer::compose(std::size_t fake_batch, std::size_t real_batch, RandomStream& rng,
                                                FakeSampling sampling) const {
    if (fakes_.size() < fake_batch || reals_.size() < real_batch) {
        throw Error(ErrorCode::InsufficientSamples,
                    "need " + std::to_string(fake_batch) + " fakes and " + std::to_string(real_batch) + " reals, have " +
                        std::to_string(fakes_.size()) + " and " + std::to_string(reals_.size()));
    }
    std::vector<std::size_t> batch;
    if (sampling == FakeSampling::Uniform) {
        batch = draw_distinct(fakes_, fake_batch, rng);
    } else {
        // Round-robin over a shuffled class order, then distinct draws within each class.
        std::vector<std::size_t> order(by_class_.size());
        for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
        shuffle(order, rng);
        std::vector<std::size_t> per_class(by_class_.size(), 0);
        for (std::size_t s = 0; s < fake_batch; ++s) ++per_class[order[s % order.size()]];
        for (std::size_t c = 0; c < by_class_.size(); ++c) {
            const auto& members = by_class_[c].second;
            if (members.size() < per_class[c]) {
                throw Error(ErrorCode::InsufficientSamples, "generator " + std::to_string(by_class_[c].first) +
                                                                " has too few samples for stratified batches");
            }
            const auto drawn = draw_distinct(members, per_class[c], rng);
            batch.insert(batch.end(), drawn.begin(), drawn.end());
        }
    }
    const auto reals = draw_distinct(reals_, real_batch, rng);
    batch.insert(batch.end(), reals.begin(), reals.end());
    return batch;
}

std::vector<std::size_t> compose_batch(std::span<const LabeledSample> train_set, std::size_t fake_batch,
                                       std::size_t real_batch, RandomStream& rng, FakeSampling sampling) {
    return BatchComposer(train_set).compose(fake_batch, real_batch, rng, sampling);
}

SignalGrid augment_grid(const SignalGrid& grid, const RunConfig& config, RandomStream& rng) {
    // Both decisions and both parameters are always drawn so the stream
    // position per sample is fixed.
    const bool do_quantize = rng.uniform() < config.augment_prob;
    const double levels = std::exp(rng.uniform(std::log(config.quantize_min), std::log(config.quantize_max)));
    const bool do_smooth = rng.uniform() < config.augment_prob;
    const double sigma = rng.uniform(config.smooth_min, config.smooth_max);
    SignalGrid out = do_quantize ? quantize(grid, levels) : grid;
    if (do_smooth) out = smooth(out, sigma);
    return out;
}

TrainResult train(const RunConfig& config, std::span<const LabeledSample> train_set, const EpochCallback& on_epoch) {
    const EncoderShape shape{config.crop_size, config.hidden_dim, config.embed_dim};
    auto init_rng = seeded_rng(config.seed, "init");

    TrainResult result;
    Checkpoint& cp = result.checkpoint;
    cp.config = config;
    cp.boundary.beta = config.momentum;

    const BatchComposer full_pool(train_set);
    cp.training_classes = full_pool.fake_classes();

    if (config.epochs == 0) {
        cp.params = init_parameters(shape, init_rng);
        cp.rng_positions[init_rng.name()] = init_rng.position();
        return result;
    }
    config.validate();
    if (full_pool.fake_class_count() < 2) {
        throw Error(ErrorCode::InsufficientSamples, "training needs at least two fake classes");
    }
    cp.params = init_parameters(shape, init_rng);

    // Probe batch: drawn once, removed from the training pool.
    auto probe_rng = seeded_rng(config.seed, "probe");
    const auto probe = full_pool.compose(config.fake_batch, config.real_batch, probe_rng);
    std::vector<bool> held_out(train_set.size(), false);
    for (std::size_t i : probe) held_out[i] = true;
    std::vector<LabeledSample> pool;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
        if (!held_out[i]) pool.push_back(train_set[i]);
    }
    const BatchComposer composer(pool);
    if (composer.fake_count() < config.fake_batch || composer.real_count() < config.real_batch) {
        throw Error(ErrorCode::InsufficientSamples, "training pool too small after holding out the probe batch");
    }

    auto batch_rng = seeded_rng(config.seed, "batches");
    auto augment_rng = seeded_rng(config.seed, "augment");
    auto view_rng = seeded_rng(config.seed, "views");

    OptimizerState opt = OptimizerState::for_parameters(cp.params, config.weight_decay);
    const std::size_t batches_per_epoch = std::max<std::size_t>(1, composer.fake_count() / config.fake_batch);
    const std::uint64_t total_steps = config.epochs * batches_per_epoch;
    const std::uint64_t warmup_steps = config.warmup_epochs * batches_per_epoch;

    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double sum_supcon = 0.0;
        double sum_center = 0.0;
        std::size_t center_batches = 0;
        double lr = 0.0;
        std::vector<double> epoch_deviations;

        for (std::size_t b = 0; b < batches_per_epoch; ++b, ++step) {
            const auto indices = composer.compose(config.fake_batch, config.real_batch, batch_rng, config.fake_sampling);
            const EncodedBatch batch = encode(cp.params, pool, indices, config, &augment_rng, &view_rng);
            const CombinedLossResult loss = combined_loss(batch.z, batch.labels, config.temperature,
                                                          config.lambda_center, cp.params.real_center,
                                                          config.denominator);
            sum_supcon += loss.supcon;
            if (loss.center_applied) {
                sum_center += loss.center;
                ++center_batches;
            }

            const auto deviations = real_deviations(batch, cp.params.real_center);

            ParameterSet grads = ParameterSet::zeros(shape);
            for (std::size_t row = 0; row < indices.size(); ++row) {
                backward_accumulate(cp.params, batch.caches[row], loss.grad.row(row), grads);
            }
            grads.real_center = loss.grad_center;

            lr = lr_at(step + 1, total_steps, warmup_steps, config.base_lr, config.min_lr);
            optimizer_step(cp.params, grads, opt, lr);

            if (!deviations.empty()) {
                if (config.boundary_cadence == BoundaryCadence::PerBatch) {
                    cp.boundary = update_boundary(cp.boundary, deviations);
                } else {
                    epoch_deviations.insert(epoch_deviations.end(), deviations.begin(), deviations.end());
                }
            }
        }
        if (config.boundary_cadence == BoundaryCadence::PerEpoch && !epoch_deviations.empty()) {
            cp.boundary = update_boundary(cp.boundary, epoch_deviations);
        }

        const EncodedBatch probe_batch = encode(cp.params, train_set, probe, config, nullptr, nullptr);
        const CombinedLossResult probe_loss = combined_loss(probe_batch.z, probe_batch.labels, config.temperature,
                                                            config.lambda_center, cp.params.real_center,
                                                            config.denominator);

        EpochRecord record;
        record.epoch = epoch + 1;
        record.mean_supcon = sum_supcon / static_cast<double>(batches_per_epoch);
        record.mean_center = center_batches > 0 ? sum_center / static_cast<double>(center_batches) : 0.0;
        record.gamma = cp.boundary.gamma;
        record.lr = lr;
        record.probe_loss = probe_loss.loss;
        result.report.epochs.push_back(record);
        if (on_epoch) on_epoch(record);
    }

    for (const RandomStream* rng : {&init_rng, &probe_rng, &batch_rng, &augment_rng, &view_rng}) {
        cp.rng_positions[rng->name()] = rng->position();
    }
    return result;
}

void save_train_report(const TrainReport& report, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["kind"] = "train";
    doc["checkpoint"] = report.checkpoint_path;
    doc["epochs"] = nlohmann::json::array();
    for (const auto& e : report.epochs) {
        doc["epochs"].push_back({{"epoch", e.epoch},
                                 {"mean_supcon", e.mean_supcon},
                                 {"mean_center", e.mean_center},
                                 {"gamma", e.gamma},
                                 {"lr", e.lr},
                                 {"probe_loss", e.probe_loss}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write report " + path.string());
    out << doc.dump(1) << '\n';
}

}  // namespace omnidfa
