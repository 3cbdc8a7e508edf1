#include "sfwlab/harm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sfwlab {

int EmbeddingModel::concept_index(const std::string& name) const {
    for (std::size_t i = 0; i < concept_names.size(); ++i)
        if (concept_names[i] == name) return static_cast<int>(i);
    throw ConfigError("unknown concept: " + name);
}

Vector EmbeddingModel::embed(const Vector& x) const {
    return image_encoder.forward(Matrix(x.transpose())).row(0).transpose();
}

Matrix EmbeddingModel::embed_rows(const Matrix& x) const {
    return image_encoder.forward(x);
}

Matrix make_concept_table(int n_concepts, int embed_dim, std::uint64_t seed) {
    require(n_concepts >= 1 && n_concepts <= embed_dim,
            "make_concept_table: need 1 <= n_concepts <= embed_dim");
    Rng rng(seed);
    const Matrix g = rng.gaussian_matrix(embed_dim, n_concepts);
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ() * Matrix::Identity(embed_dim, n_concepts);
    return q.transpose();
}

namespace {

// d cos(u, e) / du for unit e: (e - cos * u_hat) / ||u||.
Vector cosine_grad_u(const Vector& u, const Vector& e) {
    const double norm = u.norm();
    const Vector u_hat = u / norm;
    const double c = u_hat.dot(e);
    return (e - c * u_hat) / norm;
}

double cosine_value(const Vector& u, const Vector& e) {
    const double norm = u.norm();
    require(norm > 0.0, "cosine density: zero embedding vector (undefined direction)");
    return u.dot(e) / norm;
}

}  // namespace

EmbeddingFitResult fit_embedding_model(EmbeddingModel& model, const Matrix& data,
                                       const std::vector<int>& labels,
                                       const EmbeddingTrainOptions& opts) {
    require(data.rows() > 0 && static_cast<std::size_t>(data.rows()) == labels.size(),
            "fit_embedding_model: labels do not match data");
    for (int c : labels)
        require(c >= 0 && c < model.n_concepts(), "fit_embedding_model: label without concept");

    const Eigen::Index n = data.rows();
    Eigen::Index n_hold = static_cast<Eigen::Index>(
        std::llround(opts.holdout_fraction * static_cast<double>(n)));
    n_hold = std::min(std::max<Eigen::Index>(n_hold, 1), n - 1);
    const Eigen::Index n_train = n - n_hold;

    Rng rng(opts.seed);
    AdamState adam = make_adam(model.image_encoder.layers(), opts.lr);

    EmbeddingFitResult result;
    result.loss_curve.reserve(opts.steps);
    const int batch = static_cast<int>(std::min<Eigen::Index>(opts.batch, n_train));

    for (int step = 1; step <= opts.steps; ++step) {
        Matrix x(batch, data.cols());
        std::vector<int> cls(batch);
        for (int i = 0; i < batch; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(rng.index(n_train));
            x.row(i) = data.row(row);
            cls[i] = labels[static_cast<std::size_t>(row)];
        }

        const Matrix u = model.embed_rows(x);
        // Symmetric contrastive objective over the batch: pull each image
        // toward its own concept, push it from every other row's concept.
        double loss = 0.0;
        Matrix upstream = Matrix::Zero(batch, model.embed_dim());
        const double pos_w = 1.0 / batch;
        const double neg_w = batch > 1 ? 1.0 / (static_cast<double>(batch) * batch - batch) : 0.0;
        Vector concept_sum = Vector::Zero(model.embed_dim());
        for (int j = 0; j < batch; ++j) concept_sum += model.concepts.row(cls[j]).transpose();
        for (int i = 0; i < batch; ++i) {
            const Vector ui = u.row(i).transpose();
            const Vector own = model.concepts.row(cls[i]).transpose();
            loss -= pos_w * cosine_value(ui, own);
            upstream.row(i) -= pos_w * cosine_grad_u(ui, own).transpose();
            if (batch > 1) {
                const Vector others = concept_sum - own;
                const double norm = ui.norm();
                const Vector u_hat = ui / norm;
                const double cos_sum = (others.dot(u_hat));
                loss += neg_w * cos_sum;
                upstream.row(i) += neg_w * ((others - cos_sum * u_hat) / norm).transpose();
            }
        }
        result.loss_curve.push_back(loss);
        if (!std::isfinite(loss))
            throw ComputeError("fit_embedding_model: loss diverged at step " +
                               std::to_string(step));

        FeedForwardNet::Gradients g = model.image_encoder.backward(x, upstream);
        adam_step(adam, model.image_encoder.layers(), g.params);
    }

    result.holdout_margin = embedding_margin(model, data.bottomRows(n_hold),
                                             {labels.end() - n_hold, labels.end()});
    return result;
}

double embedding_margin(const EmbeddingModel& model, const Matrix& data,
                        const std::vector<int>& labels) {
    require(data.rows() > 0, "embedding_margin: empty set");
    const Matrix u = model.embed_rows(data);
    double same = 0.0, cross = 0.0;
    long n_same = 0, n_cross = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const Vector ui = u.row(i).transpose();
        for (int c = 0; c < model.n_concepts(); ++c) {
            const double val = cosine_value(ui, model.concepts.row(c).transpose());
            if (c == labels[static_cast<std::size_t>(i)]) {
                same += val;
                ++n_same;
            } else {
                cross += val;
                ++n_cross;
            }
        }
    }
    same /= std::max(1L, n_same);
    cross /= std::max(1L, n_cross);
    return same - cross;
}

GaussianMixtureDensity::GaussianMixtureDensity(Matrix means, Matrix variances, Vector weights,
                                               double clip_floor)
    : HarmDensity(clip_floor),
      means_(std::move(means)),
      variances_(std::move(variances)),
      weights_(std::move(weights)) {
    require(means_.rows() == variances_.rows() && means_.rows() == weights_.size(),
            "GaussianMixtureDensity: component count mismatch");
    require(means_.cols() == variances_.cols(), "GaussianMixtureDensity: dim mismatch");
    require((variances_.array() > 0.0).all(), "GaussianMixtureDensity: variances must be > 0");
    require((weights_.array() >= 0.0).all() && weights_.sum() > 0.0,
            "GaussianMixtureDensity: weights must be nonnegative, not all zero");
    log_norm_ = Vector(means_.rows());
    for (Eigen::Index i = 0; i < means_.rows(); ++i)
        log_norm_[i] = -0.5 * (2.0 * std::numbers::pi * variances_.row(i).array()).log().sum();
}

double GaussianMixtureDensity::eval(const Vector& x) const {
    require(x.size() == means_.cols(), "GaussianMixtureDensity: dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < means_.rows(); ++i) {
        const auto d = (x.transpose() - means_.row(i)).array();
        const double log_pdf = log_norm_[i] - 0.5 * (d.square() / variances_.row(i).array()).sum();
        acc += weights_[i] * std::exp(log_pdf);
    }
    return acc;
}

GradLogResult GaussianMixtureDensity::grad_log(const Vector& x) const {
    const double p = eval(x);
    if (p <= clip_floor_) return {Vector::Zero(x.size()), true};
    Vector grad = Vector::Zero(x.size());
    for (Eigen::Index i = 0; i < means_.rows(); ++i) {
        const auto d = (x.transpose() - means_.row(i)).array();
        const double log_pdf = log_norm_[i] - 0.5 * (d.square() / variances_.row(i).array()).sum();
        const double resp = weights_[i] * std::exp(log_pdf) / p;
        grad -= resp * (d / variances_.row(i).array()).matrix().transpose();
    }
    return {std::move(grad), false};
}

CosineConceptDensity::CosineConceptDensity(EmbeddingModel embedding, int concept,
                                           double clip_floor)
    : HarmDensity(clip_floor), embedding_(std::move(embedding)), concept_(concept) {
    require(concept_ >= 0 && concept_ < embedding_.n_concepts(),
            "CosineConceptDensity: concept index out of range");
}

double CosineConceptDensity::eval(const Vector& x) const {
    const Vector u = embedding_.embed(x);
    return std::max(0.0, cosine_value(u, embedding_.concepts.row(concept_).transpose()));
}

GradLogResult CosineConceptDensity::grad_log(const Vector& x) const {
    const Vector u = embedding_.embed(x);
    const Vector e = embedding_.concepts.row(concept_).transpose();
    const double p = std::max(0.0, cosine_value(u, e));
    if (p <= clip_floor_) return {Vector::Zero(x.size()), true};
    const Vector upstream = cosine_grad_u(u, e) / p;
    const Matrix g =
        embedding_.image_encoder.input_grad(Matrix(x.transpose()), Matrix(upstream.transpose()));
    return {g.row(0).transpose(), false};
}

MultiConceptDensity::MultiConceptDensity(EmbeddingModel embedding, std::vector<int> concepts,
                                         ConceptAggregation mode, double clip_floor)
    : HarmDensity(clip_floor),
      embedding_(std::move(embedding)),
      concepts_(std::move(concepts)),
      mode_(mode) {
    require(!concepts_.empty(), "MultiConceptDensity: need at least one concept");
    for (int c : concepts_)
        require(c >= 0 && c < embedding_.n_concepts(),
                "MultiConceptDensity: concept index out of range");
}

double MultiConceptDensity::concept_value(const Vector& u, int concept) const {
    return std::max(0.0, cosine_value(u, embedding_.concepts.row(concept).transpose()));
}

double MultiConceptDensity::eval(const Vector& x) const {
    const Vector u = embedding_.embed(x);
    if (mode_ == ConceptAggregation::Average) {
        double acc = 0.0;
        for (int c : concepts_) acc += concept_value(u, c);
        return acc / static_cast<double>(concepts_.size());
    }
    double best = 0.0;
    for (int c : concepts_) best = std::max(best, concept_value(u, c));
    return best;
}

std::pair<int, double> MultiConceptDensity::select_active_concept(const Vector& x) const {
    const Vector u = embedding_.embed(x);
    int best = concepts_[0];
    double best_val = concept_value(u, concepts_[0]);
    for (std::size_t i = 1; i < concepts_.size(); ++i) {
        const double v = concept_value(u, concepts_[i]);
        if (v > best_val || (v == best_val && concepts_[i] < best)) {
            best = concepts_[i];
            best_val = v;
        }
    }
    return {best, best_val};
}

GradLogResult MultiConceptDensity::grad_log(const Vector& x) const {
    const Vector u = embedding_.embed(x);
    Vector upstream = Vector::Zero(embedding_.embed_dim());
    double p = 0.0;
    if (mode_ == ConceptAggregation::Average) {
        const double inv_m = 1.0 / static_cast<double>(concepts_.size());
        Vector dsum = Vector::Zero(embedding_.embed_dim());
        for (int c : concepts_) {
            const Vector e = embedding_.concepts.row(c).transpose();
            const double v = cosine_value(u, e);
            if (v > 0.0) {
                p += inv_m * v;
                dsum += inv_m * cosine_grad_u(u, e);
            }
        }
        if (p <= clip_floor_) return {Vector::Zero(x.size()), true};
        upstream = dsum / p;
    } else {
        const auto [winner, val] = select_active_concept(x);
        p = val;
        if (p <= clip_floor_) return {Vector::Zero(x.size()), true};
        upstream = cosine_grad_u(u, embedding_.concepts.row(winner).transpose()) / p;
    }
    const Matrix g =
        embedding_.image_encoder.input_grad(Matrix(x.transpose()), Matrix(upstream.transpose()));
    return {g.row(0).transpose(), false};
}

}  // namespace sfwlab
