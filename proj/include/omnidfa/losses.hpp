#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "omnidfa/config.hpp"
#include "omnidfa/core.hpp"
#include "omnidfa/tensor.hpp"

namespace omnidfa {

/// N x D embeddings with one label per row. All real samples share one class;
/// each generator id is its own class.
struct BatchEmbeddings {
    Matrix z;
    std::vector<ClassLabel> labels;

    /// Requires N >= 2, matching label count, and unit rows within 1e-6.
    void validate() const;
};

struct SupConResult {
    double loss = 0.0;
    Matrix grad;  // dL/dZ, same shape as Z
    std::size_t anchors_with_positives = 0;
};

struct CenterLossResult {
    double loss = 0.0;
    Matrix grad;        // nonzero only on real rows
    Vector grad_center;
    std::size_t real_count = 0;
};

struct CombinedLossResult {
    double loss = 0.0;
    double supcon = 0.0;
    double center = 0.0;
    bool center_applied = false;
    Matrix grad;
    Vector grad_center;
};

/// Supervised contrastive loss summed over anchors:
///   L = sum_i -1/|P(i)| sum_{p in P(i)} log( exp(z_i.z_p/t) / sum_{a in A(i)} exp(z_i.z_a/t) )
/// P(i) is every other row of the anchor's class. A(i) is every row except the
/// anchor (AllButAnchor) or P(i) itself (PositivesOnly). Anchors without
/// positives contribute zero; if no anchor has one, throws DegenerateBatch.
SupConResult supcon_loss(const BatchEmbeddings& batch, double temperature,
                         DenominatorSet denominator = DenominatorSet::AllButAnchor);

/// Same computation on unconstrained rows (no unit-norm check). Gradients are
/// taken with respect to the rows as given.
SupConResult supcon_loss(const Matrix& z, std::span<const ClassLabel> labels, double temperature,
                         DenominatorSet denominator = DenominatorSet::AllButAnchor);

/// L = mean over real rows of (1 - z_p . c). Throws NoRealSamples.
CenterLossResult center_loss(const BatchEmbeddings& batch, std::span<const double> center);
CenterLossResult center_loss(const Matrix& z, std::span<const ClassLabel> labels, std::span<const double> center);

/// L = L_sup + lambda * L_cen. The center term is skipped when the batch has
/// no real rows.
CombinedLossResult combined_loss(const BatchEmbeddings& batch, double temperature, double lambda,
                                 std::span<const double> center,
                                 DenominatorSet denominator = DenominatorSet::AllButAnchor);
CombinedLossResult combined_loss(const Matrix& z, std::span<const ClassLabel> labels, double temperature,
                                 double lambda, std::span<const double> center,
                                 DenominatorSet denominator = DenominatorSet::AllButAnchor);

}  // namespace omnidfa
