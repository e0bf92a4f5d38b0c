#include "omnidfa/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "omnidfa/error.hpp"
#include "omnidfa/parallel.hpp"

namespace omnidfa {
namespace {

// y = W x + b
void affine(const Matrix& w, std::span<const double> b, std::span<const double> x, std::span<double> y) {
    for (std::size_t r = 0; r < w.rows; ++r) y[r] = b[r] + dot(w.row(r), x);
}

// grad_w += g x^T, grad_b += g, and (optionally) grad_x = W^T g.
void affine_backward(const Matrix& w, std::span<const double> x, std::span<const double> g, Matrix& grad_w,
                     std::span<double> grad_b, std::span<double> grad_x) {
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double gr = g[r];
        grad_b[r] += gr;
        if (gr == 0.0) continue;
        auto row = grad_w.row(r);
        for (std::size_t c = 0; c < w.cols; ++c) row[c] += gr * x[c];
    }
    if (grad_x.empty()) return;
    std::fill(grad_x.begin(), grad_x.end(), 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        const auto row = w.row(r);
        for (std::size_t c = 0; c < w.cols; ++c) grad_x[c] += gr * row[c];
    }
}

Vector crop(const SignalGrid& grid, std::size_t top, std::size_t left, std::size_t size) {
    Vector out(size * size);
    for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t c = 0; c < size; ++c) out[r * size + c] = grid(top + r, left + c);
    }
    return out;
}

// Row i of the result holds the weights of input cells averaged into output
// cell i when `in` cells are resampled to `out` cells.
Matrix area_weights(std::size_t in, std::size_t out) {
    Matrix weights(out, in);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
        const double lo = static_cast<double>(i) * scale;
        const double hi = lo + scale;
        const auto first = static_cast<std::size_t>(std::floor(lo));
        const auto last = std::min(in, static_cast<std::size_t>(std::ceil(hi)));
        for (std::size_t j = first; j < last; ++j) {
            const double overlap = std::min(hi, static_cast<double>(j + 1)) - std::max(lo, static_cast<double>(j));
            if (overlap > 0.0) weights(i, j) = overlap / scale;
        }
    }
    return weights;
}

}  // namespace

ParameterSet ParameterSet::zeros(const EncoderShape& shape) {
    ParameterSet p;
    const std::size_t h = shape.hidden_dim;
    p.global_weight = Matrix(h, shape.input_dim());
    p.global_bias.assign(h, 0.0);
    p.local_weight = Matrix(h, shape.input_dim());
    p.local_bias.assign(h, 0.0);
    p.hidden_weight = Matrix(h, 2 * h);
    p.hidden_bias.assign(h, 0.0);
    p.output_weight = Matrix(shape.embed_dim, h);
    p.output_bias.assign(shape.embed_dim, 0.0);
    p.real_center.assign(shape.embed_dim, 0.0);
    return p;
}

EncoderShape ParameterSet::shape() const {
    const auto crop = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(global_weight.cols))));
    return {crop, global_weight.rows, output_weight.rows};
}

std::size_t ParameterSet::parameter_count() const {
    std::size_t n = 0;
    for_each_tensor([&](std::string_view, std::span<const double> t) { n += t.size(); });
    return n;
}

ParameterSet init_parameters(const EncoderShape& shape, RandomStream& rng) {
    ParameterSet p = ParameterSet::zeros(shape);
    auto fill = [&](Matrix& w) {
        const double s = 1.0 / std::sqrt(static_cast<double>(w.cols));
        for (double& v : w.data) v = rng.uniform(-s, s);
    };
    fill(p.global_weight);
    fill(p.local_weight);
    fill(p.hidden_weight);
    fill(p.output_weight);
    p.output_bias[0] = 0.1;
    for (double& v : p.real_center) v = rng.normal();
    project_real_center(p);
    return p;
}

void project_real_center(ParameterSet& params) {
    const double n = norm2(params.real_center);
    if (!(n >= 1e-12)) throw Error(ErrorCode::ZeroFeatureNorm, "real center collapsed to zero");
    for (double& v : params.real_center) v /= n;
}

SignalGrid area_resize(const SignalGrid& grid, std::size_t shorter_edge) {
    const std::size_t h = grid.height();
    const std::size_t w = grid.width();
    const std::size_t shorter = std::min(h, w);
    auto scaled = [&](std::size_t edge) {
        if (edge == shorter) return shorter_edge;
        return static_cast<std::size_t>(std::lround(static_cast<double>(edge * shorter_edge) / static_cast<double>(shorter)));
    };
    const std::size_t out_h = scaled(h);
    const std::size_t out_w = scaled(w);
    if (out_h == h && out_w == w) return grid;

    const Matrix row_w = area_weights(h, out_h);
    const Matrix col_w = area_weights(w, out_w);
    SignalGrid cols_done(h, out_w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < out_w; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < w; ++j) acc += col_w(c, j) * grid(r, j);
            cols_done(r, c) = acc;
        }
    }
    SignalGrid out(out_h, out_w);
    for (std::size_t r = 0; r < out_h; ++r) {
        for (std::size_t c = 0; c < out_w; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < h; ++i) acc += row_w(r, i) * cols_done(i, c);
            out(r, c) = acc;
        }
    }
    return out;
}

ViewPair make_views(const SignalGrid& grid, std::size_t crop_size, ViewMode mode, RandomStream* rng) {
    if (crop_size == 0 || grid.height() < crop_size || grid.width() < crop_size) {
        throw Error(ErrorCode::GridTooSmall, std::to_string(grid.height()) + "x" + std::to_string(grid.width()) +
                                                 " grid cannot yield a " + std::to_string(crop_size) + " crop");
    }
    ViewPair views;
    const SignalGrid pooled = area_resize(grid, crop_size);
    views.global_view =
        crop(pooled, (pooled.height() - crop_size) / 2, (pooled.width() - crop_size) / 2, crop_size);

    std::size_t top = (grid.height() - crop_size) / 2;
    std::size_t left = (grid.width() - crop_size) / 2;
    if (mode == ViewMode::TrainRandom) {
        if (rng == nullptr) throw Error(ErrorCode::InvalidArgument, "TrainRandom views need a random stream");
        top = static_cast<std::size_t>(rng->index(grid.height() - crop_size + 1));
        left = static_cast<std::size_t>(rng->index(grid.width() - crop_size + 1));
    }
    views.local_view = crop(grid, top, left, crop_size);
    return views;
}

ForwardCache forward(const ParameterSet& params, const ViewPair& views) {
    const EncoderShape shape = params.shape();
    if (views.global_view.size() != shape.input_dim() || views.local_view.size() != shape.input_dim()) {
        throw Error(ErrorCode::InvalidArgument, "view size does not match encoder input");
    }
    const std::size_t h = shape.hidden_dim;
    ForwardCache cache;
    cache.global_view = views.global_view;
    cache.local_view = views.local_view;
    cache.concat.resize(2 * h);
    affine(params.global_weight, params.global_bias, cache.global_view, std::span(cache.concat).first(h));
    affine(params.local_weight, params.local_bias, cache.local_view, std::span(cache.concat).last(h));

    cache.pre_relu.resize(h);
    affine(params.hidden_weight, params.hidden_bias, cache.concat, cache.pre_relu);
    cache.activation.resize(h);
    for (std::size_t i = 0; i < h; ++i) cache.activation[i] = cache.pre_relu[i] > 0.0 ? cache.pre_relu[i] : 0.0;

    cache.features.resize(shape.embed_dim);
    affine(params.output_weight, params.output_bias, cache.activation, cache.features);
    cache.feature_norm = norm2(cache.features);
    if (!(cache.feature_norm >= 1e-12)) throw Error(ErrorCode::ZeroFeatureNorm, "feature vector norm below 1e-12");
    cache.embedding = cache.features;
    for (double& v : cache.embedding) v /= cache.feature_norm;
    return cache;
}

void backward_accumulate(const ParameterSet& params, const ForwardCache& cache, std::span<const double> upstream,
                         ParameterSet& grads) {
    const EncoderShape shape = params.shape();
    const std::size_t h = shape.hidden_dim;
    if (upstream.size() != shape.embed_dim || cache.embedding.size() != shape.embed_dim ||
        cache.concat.size() != 2 * h || cache.pre_relu.size() != h ||
        cache.global_view.size() != shape.input_dim() || cache.local_view.size() != shape.input_dim() ||
        !(grads.shape() == shape)) {
        throw Error(ErrorCode::StaleCache, "forward cache does not match parameter shapes");
    }

    // Tangent projection: dL/df = (I - z z^T) dL/dz / ||f||.
    const double radial = dot(cache.embedding, upstream);
    Vector grad_features(shape.embed_dim);
    for (std::size_t i = 0; i < shape.embed_dim; ++i) {
        grad_features[i] = (upstream[i] - cache.embedding[i] * radial) / cache.feature_norm;
    }

    Vector grad_activation(h);
    affine_backward(params.output_weight, cache.activation, grad_features, grads.output_weight, grads.output_bias,
                    grad_activation);
    for (std::size_t i = 0; i < h; ++i) {
        if (cache.pre_relu[i] <= 0.0) grad_activation[i] = 0.0;
    }

    Vector grad_concat(2 * h);
    affine_backward(params.hidden_weight, cache.concat, grad_activation, grads.hidden_weight, grads.hidden_bias,
                    grad_concat);

    const std::span<const double> grad_all(grad_concat);
    affine_backward(params.global_weight, cache.global_view, grad_all.first(h), grads.global_weight,
                    grads.global_bias, {});
    affine_backward(params.local_weight, cache.local_view, grad_all.last(h), grads.local_weight, grads.local_bias,
                    {});
}

ParameterSet backward(const ParameterSet& params, const ForwardCache& cache, std::span<const double> upstream) {
    ParameterSet grads = ParameterSet::zeros(params.shape());
    backward_accumulate(params, cache, upstream, grads);
    return grads;
}

std::vector<UnitEmbedding> embed_grids(const ParameterSet& params, std::span<const SignalGrid* const> grids,
                                       std::size_t threads) {
    const std::size_t crop_size = params.shape().crop_size;
    std::vector<Vector> raw(grids.size());
    parallel_for(grids.size(), threads, [&](std::size_t i) {
        raw[i] = forward(params, make_views(*grids[i], crop_size, ViewMode::EvalCenter)).embedding;
    });
    std::vector<UnitEmbedding> out;
    out.reserve(raw.size());
    for (auto& v : raw) out.emplace_back(std::move(v));
    return out;
}

}  // namespace omnidfa
