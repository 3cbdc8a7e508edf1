// The pluggable harmfulness density p_h: evaluable value and log-gradient.
// Three variants: analytic Gaussian mixture, cosine similarity against a
// concept vector through a learned image encoder, and multi-concept
// aggregation (average or top-1). Only grad log p_h enters the sampler, so
// none of these are normalized.
#pragma once

#include "sfwlab/nn.hpp"
#include "sfwlab/rng.hpp"
#include "sfwlab/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace sfwlab {

// Synthetic CLIP stand-in: an image encoder into the shared embedding space
// plus a table of unit concept vectors (the text-embedding surrogate).
struct EmbeddingModel {
    FeedForwardNet image_encoder;        // ambient -> R^embed_dim
    Matrix concepts;                     // (n_concepts, embed_dim), unit rows
    std::vector<std::string> concept_names;

    int embed_dim() const { return static_cast<int>(concepts.cols()); }
    int n_concepts() const { return static_cast<int>(concepts.rows()); }
    int concept_index(const std::string& name) const;

    Vector embed(const Vector& x) const;
    Matrix embed_rows(const Matrix& x) const;
};

// Orthonormal concept vectors, one per name, fixed by seed.
Matrix make_concept_table(int n_concepts, int embed_dim, std::uint64_t seed);

struct EmbeddingTrainOptions {
    int steps = 1500;
    int batch = 128;
    double lr = 2e-3;
    std::uint64_t seed = 0;
    double holdout_fraction = 0.1;
};

struct EmbeddingFitResult {
    std::vector<double> loss_curve;
    double holdout_margin = 0.0;  // mean same-class cosine - mean cross-class cosine
};

// Contrastive fit: same-class image/concept cosines pushed up, cross-class
// cosines pushed down. Concept vectors stay frozen; only the encoder trains.
EmbeddingFitResult fit_embedding_model(EmbeddingModel& model, const Matrix& data,
                                       const std::vector<int>& labels,
                                       const EmbeddingTrainOptions& opts);

// Margin diagnostic on an arbitrary labeled set.
double embedding_margin(const EmbeddingModel& model, const Matrix& data,
                        const std::vector<int>& labels);

struct GradLogResult {
    Vector grad;
    bool clipped = false;  // density at or below the clip floor; grad is zero
};

class HarmDensity {
public:
    virtual ~HarmDensity() = default;
    virtual double eval(const Vector& x) const = 0;
    virtual GradLogResult grad_log(const Vector& x) const = 0;
    // Concept driving the density at x; -1 for single-concept variants.
    virtual int active_concept_id(const Vector&) const { return -1; }
    double clip_floor() const { return clip_floor_; }

protected:
    explicit HarmDensity(double clip_floor) : clip_floor_(clip_floor) {}
    double clip_floor_;
};

// Normalized mixture of diagonal Gaussians; positive everywhere, closed-form
// log-gradient.
class GaussianMixtureDensity final : public HarmDensity {
public:
    GaussianMixtureDensity(Matrix means, Matrix variances, Vector weights,
                           double clip_floor = 1e-6);
    double eval(const Vector& x) const override;
    GradLogResult grad_log(const Vector& x) const override;

private:
    Matrix means_;      // (components, dim)
    Matrix variances_;  // (components, dim), diagonal covariances
    Vector weights_;
    Vector log_norm_;   // per-component log normalizing constant
};

// cos(image_encoder(x), e_c), clipped at zero.
class CosineConceptDensity final : public HarmDensity {
public:
    CosineConceptDensity(EmbeddingModel embedding, int concept, double clip_floor = 1e-6);
    double eval(const Vector& x) const override;
    GradLogResult grad_log(const Vector& x) const override;
    const EmbeddingModel& embedding() const { return embedding_; }
    int concept() const { return concept_; }

private:
    EmbeddingModel embedding_;
    int concept_;
};

enum class ConceptAggregation { Average, Top1 };

// Multiple concepts over one embedding model. Average mode evaluates the
// arithmetic mean of the clipped per-concept values; top-1 evaluates the max
// and differentiates only the winning concept.
class MultiConceptDensity final : public HarmDensity {
public:
    MultiConceptDensity(EmbeddingModel embedding, std::vector<int> concepts,
                        ConceptAggregation mode, double clip_floor = 1e-6);
    double eval(const Vector& x) const override;
    GradLogResult grad_log(const Vector& x) const override;

    // Argmax over per-concept values; ties break to the lowest concept index.
    std::pair<int, double> select_active_concept(const Vector& x) const;
    ConceptAggregation mode() const { return mode_; }
    const std::vector<int>& concepts() const { return concepts_; }
    const EmbeddingModel& embedding() const { return embedding_; }

private:
    double concept_value(const Vector& u, int concept) const;
    EmbeddingModel embedding_;
    std::vector<int> concepts_;
    ConceptAggregation mode_;
};

}  // namespace sfwlab
