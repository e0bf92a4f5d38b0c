#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "omnidfa/core.hpp"
#include "omnidfa/rng.hpp"
#include "omnidfa/tensor.hpp"

namespace omnidfa {

struct EncoderShape {
    std::size_t crop_size = 16;
    std::size_t hidden_dim = 64;
    std::size_t embed_dim = 32;

    std::size_t input_dim() const noexcept { return crop_size * crop_size; }
    bool operator==(const EncoderShape&) const = default;
};

/// Every trainable tensor: two view projections, a two-layer MLP head, and
/// the learnable real-class center.
struct ParameterSet {
    Matrix global_weight;  // hidden x crop^2
    Vector global_bias;
    Matrix local_weight;   // hidden x crop^2
    Vector local_bias;
    Matrix hidden_weight;  // hidden x 2*hidden
    Vector hidden_bias;
    Matrix output_weight;  // embed x hidden
    Vector output_bias;
    Vector real_center;    // unit norm

    static ParameterSet zeros(const EncoderShape& shape);
    EncoderShape shape() const;
    std::size_t parameter_count() const;

    /// Calls fn(name, span) for every tensor in a fixed order.
    template <typename Fn>
    void for_each_tensor(Fn&& fn) { visit(*this, fn); }
    template <typename Fn>
    void for_each_tensor(Fn&& fn) const { visit(*this, fn); }

    bool operator==(const ParameterSet&) const = default;

private:
    template <typename Self, typename Fn>
    static void visit(Self& self, Fn& fn) {
        fn(std::string_view("global_weight"), std::span(self.global_weight.data));
        fn(std::string_view("global_bias"), std::span(self.global_bias));
        fn(std::string_view("local_weight"), std::span(self.local_weight.data));
        fn(std::string_view("local_bias"), std::span(self.local_bias));
        fn(std::string_view("hidden_weight"), std::span(self.hidden_weight.data));
        fn(std::string_view("hidden_bias"), std::span(self.hidden_bias));
        fn(std::string_view("output_weight"), std::span(self.output_weight.data));
        fn(std::string_view("output_bias"), std::span(self.output_bias));
        fn(std::string_view("real_center"), std::span(self.real_center));
    }
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero hidden biases,
/// output bias 0.1 * e_0 so the features are nonzero at step zero, and a
/// random unit real center.
ParameterSet init_parameters(const EncoderShape& shape, RandomStream& rng);

/// Rescales the real center to unit length.
void project_real_center(ParameterSet& params);

enum class ViewMode { TrainRandom, EvalCenter };

struct ViewPair {
    Vector global_view;  // area-downsampled, then center-cropped
    Vector local_view;   // native-resolution crop
};

/// Throws GridTooSmall when either grid edge is below crop_size. `rng` is
/// only consulted (and required) in TrainRandom mode.
ViewPair make_views(const SignalGrid& grid, std::size_t crop_size, ViewMode mode, RandomStream* rng = nullptr);

/// Area-averaging resize so the shorter edge equals `shorter_edge`, keeping aspect.
SignalGrid area_resize(const SignalGrid& grid, std::size_t shorter_edge);

struct ForwardCache {
    Vector global_view;
    Vector local_view;
    Vector concat;      // [W_g v_g + b_g, W_l v_l + b_l]
    Vector pre_relu;
    Vector activation;
    Vector features;    // f(x), before normalization
    double feature_norm = 0.0;
    Vector embedding;   // features / feature_norm

    UnitEmbedding unit() const { return UnitEmbedding(embedding); }
};

/// Throws ZeroFeatureNorm when ||f(x)|| < 1e-12.
ForwardCache forward(const ParameterSet& params, const ViewPair& views);

/// Adds dL/dtheta for one sample to `grads`, given dL/dz. The normalization
/// Jacobian (I - z z^T) / ||f|| is applied here. The real center slot of
/// `grads` is left untouched. Throws StaleCache on shape mismatch.
void backward_accumulate(const ParameterSet& params, const ForwardCache& cache, std::span<const double> upstream,
                         ParameterSet& grads);

/// Single-sample convenience wrapper returning a fresh gradient set.
ParameterSet backward(const ParameterSet& params, const ForwardCache& cache, std::span<const double> upstream);

/// EvalCenter embeddings of many grids, fanned out over `threads` workers.
std::vector<UnitEmbedding> embed_grids(const ParameterSet& params, std::span<const SignalGrid* const> grids,
                                       std::size_t threads = 1);

}  // namespace omnidfa
