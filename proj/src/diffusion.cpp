#include "sfwlab/diffusion.hpp"

#include <cmath>
#include <numbers>

namespace sfwlab {

Vector ScoreModel::time_embedding(int t) const {
    Vector e(time_dim);
    const int half = time_dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::pow(10000.0, -static_cast<double>(i) / half);
        e[2 * i] = std::sin(t * freq);
        e[2 * i + 1] = std::cos(t * freq);
    }
    if (time_dim % 2 == 1) e[time_dim - 1] = 0.0;
    return e;
}

Vector ScoreModel::cond_embedding(int cond) const {
    if (cond == kNullCondition) return Vector::Zero(cond_dim);
    require(cond >= 0 && cond < n_classes, "cond_embedding: class id out of range");
    return cond_table.row(cond).transpose();
}

Matrix ScoreModel::assemble_input(const Matrix& xt, const std::vector<int>& ts,
                                  const std::vector<int>& conds) const {
    const auto batch = xt.rows();
    require(xt.cols() == data_dim, "score model: x has wrong dimension");
    require(static_cast<Eigen::Index>(ts.size()) == batch &&
                static_cast<Eigen::Index>(conds.size()) == batch,
            "score model: ts/conds must match batch size");
    Matrix input(batch, data_dim + time_dim + cond_dim);
    for (Eigen::Index i = 0; i < batch; ++i) {
        require(ts[i] >= 1 && ts[i] <= T, "score model: t out of range");
        input.block(i, 0, 1, data_dim) = xt.row(i);
        input.block(i, data_dim, 1, time_dim) = time_embedding(ts[i]).transpose();
        input.block(i, data_dim + time_dim, 1, cond_dim) = cond_embedding(conds[i]).transpose();
    }
    return input;
}

Matrix ScoreModel::eps_batch(const Matrix& xt, const std::vector<int>& ts,
                             const std::vector<int>& conds) const {
    return net.forward(assemble_input(xt, ts, conds));
}

Matrix ScoreModel::eps(const Matrix& xt, int t, int cond) const {
    const std::vector<int> ts(xt.rows(), t);
    const std::vector<int> conds(xt.rows(), cond);
    return eps_batch(xt, ts, conds);
}

Vector ScoreModel::eps(const Vector& xt, int t, int cond) const {
    return eps(Matrix(xt.transpose()), t, cond).row(0).transpose();
}

Vector ScoreModel::eps_input_vjp(const Vector& xt, int t, int cond, const Vector& upstream) const {
    const Matrix input = assemble_input(Matrix(xt.transpose()), {t}, {cond});
    const Matrix grad = net.input_grad(input, Matrix(upstream.transpose()));
    return grad.block(0, 0, 1, data_dim).transpose();
}

ScoreModel make_score_model(int data_dim, int n_classes, int T, const std::vector<int>& hidden,
                            Activation act, std::uint64_t seed, int time_dim, int cond_dim) {
    require(data_dim > 0 && n_classes > 0 && T >= 1, "make_score_model: bad dimensions");
    ScoreModel m;
    m.data_dim = data_dim;
    m.time_dim = time_dim;
    m.cond_dim = cond_dim;
    m.n_classes = n_classes;
    m.T = T;
    std::vector<int> dims;
    dims.push_back(data_dim + time_dim + cond_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(data_dim);
    m.net = FeedForwardNet(dims, act, seed);
    m.cond_table = Matrix::Zero(n_classes, cond_dim);
    return m;
}

DiffusionSample forward_noise_with(const NoiseSchedule& sched, const Vector& x0, int t,
                                   const Vector& eps) {
    require(t >= 1 && t <= sched.T, "forward_noise: t out of range");
    require(eps.size() == x0.size(), "forward_noise: eps shape mismatch");
    DiffusionSample s;
    s.x0 = x0;
    s.t = t;
    s.eps = eps;
    const double ab = sched.alpha_bar(t);
    s.xt = std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
    return s;
}

DiffusionSample forward_noise(const NoiseSchedule& sched, const Vector& x0, int t, Rng& rng) {
    return forward_noise_with(sched, x0, t, rng.gaussian_vector(x0.size()));
}

namespace {

double holdout_loss(const ScoreModel& model, const Matrix& data, const std::vector<int>& labels,
                    Eigen::Index begin, Eigen::Index end, const NoiseSchedule& sched, Rng& rng) {
    const Eigen::Index n = end - begin;
    const int d = model.data_dim;
    Matrix xt(n, d), eps(n, d);
    std::vector<int> ts(n), conds(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int t = rng.uniform_int(1, sched.T);
        const Vector e = rng.gaussian_vector(d);
        const double ab = sched.alpha_bar(t);
        xt.row(i) = std::sqrt(ab) * data.row(begin + i) + std::sqrt(1.0 - ab) * e.transpose();
        eps.row(i) = e.transpose();
        ts[i] = t;
        conds[i] = labels[static_cast<std::size_t>(begin + i)];
    }
    const Matrix pred = model.eps_batch(xt, ts, conds);
    return (pred - eps).squaredNorm() / static_cast<double>(n);
}

}  // namespace

TrainResult train_score_model(ScoreModel& model, const Matrix& data,
                              const std::vector<int>& labels, const NoiseSchedule& sched,
                              const TrainOptions& opts) {
    require(data.rows() > 0, "train_score_model: empty dataset");
    require(static_cast<std::size_t>(data.rows()) == labels.size(),
            "train_score_model: labels do not match data");
    require(data.cols() == model.data_dim, "train_score_model: data dimension mismatch");
    require(sched.T == model.T, "train_score_model: schedule length does not match model");

    const Eigen::Index n = data.rows();
    Eigen::Index n_hold = static_cast<Eigen::Index>(
        std::llround(opts.holdout_fraction * static_cast<double>(n)));
    n_hold = std::min(std::max<Eigen::Index>(n_hold, 1), n - 1);  // 0 when n == 1
    const Eigen::Index n_train = n - n_hold;
    const Eigen::Index hold_begin = n_hold == 0 ? 0 : n_train;
    const Eigen::Index hold_end = n;

    const int d = model.data_dim;
    Rng rng(opts.seed);

    // Parameter set = net layers plus the class-embedding table as an extra
    // bias-free pseudo-layer, so one Adam state covers everything.
    std::vector<DenseLayer> params = model.net.layers();
    params.push_back({model.cond_table, Vector(0)});
    AdamState adam = make_adam(params, opts.lr);

    TrainResult result;
    result.loss_curve.reserve(opts.steps);

    for (int step = 1; step <= opts.steps; ++step) {
        // Keep the live model in sync with the optimizer's parameter set.
        model.net.layers().assign(params.begin(), params.end() - 1);
        model.cond_table = params.back().w;

        Matrix xt(opts.batch, d), eps(opts.batch, d);
        std::vector<int> ts(opts.batch), conds(opts.batch);
        for (int i = 0; i < opts.batch; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(rng.index(n_train));
            const int t = rng.uniform_int(1, sched.T);
            const Vector e = rng.gaussian_vector(d);
            const int label = labels[static_cast<std::size_t>(row)];
            const bool drop = rng.uniform() < opts.p_uncond;
            const double ab = sched.alpha_bar(t);
            xt.row(i) = std::sqrt(ab) * data.row(row) + std::sqrt(1.0 - ab) * e.transpose();
            eps.row(i) = e.transpose();
            ts[i] = t;
            conds[i] = drop ? kNullCondition : label;
        }

        const Matrix input = model.assemble_input(xt, ts, conds);
        const Matrix pred = model.net.forward(input);
        const Matrix diff = pred - eps;
        const double loss = diff.squaredNorm() / static_cast<double>(opts.batch);
        result.loss_curve.push_back(loss);
        if (!std::isfinite(loss)) {
            throw ComputeError("train_score_model: loss diverged (NaN/Inf) at step " +
                               std::to_string(step));
        }

        const Matrix upstream = (2.0 / static_cast<double>(opts.batch)) * diff;
        FeedForwardNet::Gradients g = model.net.backward(input, upstream);

        // Embedding-table rows get the condition slice of the input gradient.
        Matrix table_grad = Matrix::Zero(model.n_classes, model.cond_dim);
        const int cond_off = model.data_dim + model.time_dim;
        for (int i = 0; i < opts.batch; ++i) {
            if (conds[i] == kNullCondition) continue;  // null embedding is fixed
            table_grad.row(conds[i]) += g.input.block(i, cond_off, 1, model.cond_dim);
        }
        std::vector<DenseLayer> grads = std::move(g.params);
        grads.push_back({std::move(table_grad), Vector(0)});

        adam_step(adam, params, grads);

        const bool last = step == opts.steps;
        if (step % opts.eval_every == 0 || last) {
            model.net.layers().assign(params.begin(), params.end() - 1);
            model.cond_table = params.back().w;
            Rng eval_rng(mix_seed(opts.seed, 0xE7A1u + static_cast<std::uint64_t>(step)));
            const double hl = n_hold == 0
                                  ? holdout_loss(model, data, labels, 0, n, sched, eval_rng)
                                  : holdout_loss(model, data, labels, hold_begin, hold_end,
                                                 sched, eval_rng);
            result.holdout_curve.emplace_back(step, hl);
        }
    }

    model.net.layers().assign(params.begin(), params.end() - 1);
    model.cond_table = params.back().w;
    ensure_finite(model.cond_table, "trained condition table");
    return result;
}

Vector predict_clean_from_eps(const NoiseSchedule& sched, const Vector& xt, int t,
                              const Vector& eps) {
    require(t >= 1 && t <= sched.T, "predict_clean: t out of range");
    const double ab = sched.alpha_bar(t);
    return (xt - std::sqrt(1.0 - ab) * eps) / std::sqrt(ab);
}

Vector predict_clean(const ScoreModel& model, const NoiseSchedule& sched, const Vector& xt,
                     int t, int cond) {
    return predict_clean_from_eps(sched, xt, t, model.eps(xt, t, cond));
}

Vector predict_eps_cfg(const ScoreModel& model, const Vector& xt, int t, int cond, double w) {
    require(w >= 0.0, "predict_eps_cfg: w must be >= 0");
    const Vector cond_eps = model.eps(xt, t, cond);
    if (w == 0.0) return cond_eps;
    const Vector uncond_eps = model.eps(xt, t, kNullCondition);
    return (1.0 + w) * cond_eps - w * uncond_eps;
}

}  // namespace sfwlab
