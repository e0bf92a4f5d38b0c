#include "omnidfa/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "omnidfa/error.hpp"

namespace omnidfa {
namespace {

void check_shapes(const Matrix& z, std::span<const ClassLabel> labels) {
    if (z.rows < 2) throw Error(ErrorCode::InvalidArgument, "batch needs at least 2 rows");
    if (labels.size() != z.rows) throw Error(ErrorCode::InvalidArgument, "label count differs from row count");
}

}  // namespace

void BatchEmbeddings::validate() const {
    check_shapes(z, labels);
    for (std::size_t i = 0; i < z.rows; ++i) {
        const double n = norm2(z.row(i));
        if (!all_finite(z.row(i)) || std::abs(n - 1.0) > 1e-6) {
            throw Error(ErrorCode::NotUnitNorm, "batch row " + std::to_string(i) + " has norm " + std::to_string(n));
        }
    }
}

SupConResult supcon_loss(const BatchEmbeddings& batch, double temperature, DenominatorSet denominator) {
    batch.validate();
    return supcon_loss(batch.z, batch.labels, temperature, denominator);
}

SupConResult supcon_loss(const Matrix& z, std::span<const ClassLabel> labels, double temperature,
                         DenominatorSet denominator) {
    check_shapes(z, labels);
    if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
    const std::size_t n = z.rows;

    Matrix logits(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = dot(z.row(i), z.row(j)) / temperature;
            logits(i, j) = s;
            logits(j, i) = s;
        }
    }

    SupConResult result;
    result.grad = Matrix(n, z.cols);
    // coeff(i, a) = dL/d logits(i, a); the symmetric logit feeds both rows.
    Matrix coeff(n, n);
    std::vector<std::size_t> positives;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
        positives.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && labels[j] == labels[i]) positives.push_back(j);
        }
        if (positives.empty()) continue;
        ++result.anchors_with_positives;

        if (denominator == DenominatorSet::AllButAnchor) {
            members.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) members.push_back(j);
            }
        } else {
            members = positives;
        }

        double shift = -std::numeric_limits<double>::infinity();
        for (std::size_t a : members) shift = std::max(shift, logits(i, a));
        double total = 0.0;
        for (std::size_t a : members) total += std::exp(logits(i, a) - shift);
        const double log_denominator = shift + std::log(total);

        const double inv_p = 1.0 / static_cast<double>(positives.size());
        double anchor_loss = 0.0;
        for (std::size_t p : positives) anchor_loss -= logits(i, p) - log_denominator;
        result.loss += inv_p * anchor_loss;

        for (std::size_t a : members) coeff(i, a) += std::exp(logits(i, a) - log_denominator);
        for (std::size_t p : positives) coeff(i, p) -= inv_p;
    }
    if (result.anchors_with_positives == 0) {
        throw Error(ErrorCode::DegenerateBatch, "no anchor in the batch has a same-class partner");
    }

    for (std::size_t i = 0; i < n; ++i) {
        auto gi = result.grad.row(i);
        for (std::size_t a = 0; a < n; ++a) {
            // logits(i,a) and logits(a,i) both depend on z_i.
            const double c = (coeff(i, a) + coeff(a, i)) / temperature;
            if (c == 0.0) continue;
            const auto za = z.row(a);
            for (std::size_t k = 0; k < z.cols; ++k) gi[k] += c * za[k];
        }
    }
    return result;
}

CenterLossResult center_loss(const BatchEmbeddings& batch, std::span<const double> center) {
    batch.validate();
    if (std::abs(norm2(center) - 1.0) > 1e-6) throw Error(ErrorCode::NotUnitNorm, "real center is not unit norm");
    return center_loss(batch.z, batch.labels, center);
}

CenterLossResult center_loss(const Matrix& z, std::span<const ClassLabel> labels, std::span<const double> center) {
    check_shapes(z, labels);
    if (center.size() != z.cols) throw Error(ErrorCode::InvalidArgument, "center dimension differs from embeddings");
    CenterLossResult result;
    result.grad = Matrix(z.rows, z.cols);
    result.grad_center.assign(z.cols, 0.0);
    for (const auto& label : labels) result.real_count += label.is_real() ? 1 : 0;
    if (result.real_count == 0) throw Error(ErrorCode::NoRealSamples, "center loss needs at least one real row");

    const double inv = 1.0 / static_cast<double>(result.real_count);
    for (std::size_t i = 0; i < z.rows; ++i) {
        if (!labels[i].is_real()) continue;
        const auto zi = z.row(i);
        result.loss += 1.0 - dot(zi, center);
        auto gi = result.grad.row(i);
        for (std::size_t k = 0; k < z.cols; ++k) {
            gi[k] = -center[k] * inv;
            result.grad_center[k] -= zi[k] * inv;
        }
    }
    result.loss *= inv;
    return result;
}

CombinedLossResult combined_loss(const BatchEmbeddings& batch, double temperature, double lambda,
                                 std::span<const double> center, DenominatorSet denominator) {
    batch.validate();
    return combined_loss(batch.z, batch.labels, temperature, lambda, center, denominator);
}

CombinedLossResult combined_loss(const Matrix& z, std::span<const ClassLabel> labels, double temperature,
                                 double lambda, std::span<const double> center, DenominatorSet denominator) {
    if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
    auto sup = supcon_loss(z, labels, temperature, denominator);
    CombinedLossResult result;
    result.supcon = sup.loss;
    result.loss = sup.loss;
    result.grad = std::move(sup.grad);
    result.grad_center.assign(z.cols, 0.0);

    const bool has_real = std::any_of(labels.begin(), labels.end(), [](const ClassLabel& l) { return l.is_real(); });
    if (!has_real) return result;

    const auto cen = center_loss(z, labels, center);
    result.center_applied = true;
    result.center = cen.loss;
    result.loss += lambda * cen.loss;
    for (std::size_t k = 0; k < result.grad.data.size(); ++k) result.grad.data[k] += lambda * cen.grad.data[k];
    for (std::size_t k = 0; k < z.cols; ++k) result.grad_center[k] = lambda * cen.grad_center[k];
    return result;
}

}  // namespace omnidfa
