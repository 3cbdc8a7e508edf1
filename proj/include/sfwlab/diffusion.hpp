// Conditional noise predictor eps_theta(x_t, t, c), forward noising, the
// denoising-score-matching training loop, clean-point prediction and
// classifier-free-guidance combination.
#pragma once

#include "sfwlab/nn.hpp"
#include "sfwlab/rng.hpp"
#include "sfwlab/schedule.hpp"
#include "sfwlab/types.hpp"

#include <cstdint>
#include <vector>

namespace sfwlab {

// Condition id passed where no class is wanted (unconditional prediction).
inline constexpr int kNullCondition = -1;

struct ScoreModel {
    FeedForwardNet net;  // input = [x | time embedding | condition embedding]
    int data_dim = 0;
    int time_dim = 16;
    int cond_dim = 8;
    int n_classes = 0;
    int T = 0;
    // Learned class-embedding table, one row per class, zero-initialized.
    // The null condition is a fixed all-zeros vector and is not a row here;
    // rows a training run never selects therefore stay identical to it.
    Matrix cond_table;  // (n_classes, cond_dim)

    Vector time_embedding(int t) const;
    Vector cond_embedding(int cond) const;  // cond == kNullCondition -> zeros

    // Per-row timesteps/conditions; xt is (batch, data_dim).
    Matrix eps_batch(const Matrix& xt, const std::vector<int>& ts,
                     const std::vector<int>& conds) const;
    // All rows share one timestep and condition.
    Matrix eps(const Matrix& xt, int t, int cond) const;
    Vector eps(const Vector& xt, int t, int cond) const;

    // Gradient of sum(upstream .* eps(xt, t, cond)) w.r.t. xt.
    Vector eps_input_vjp(const Vector& xt, int t, int cond, const Vector& upstream) const;

    Matrix assemble_input(const Matrix& xt, const std::vector<int>& ts,
                          const std::vector<int>& conds) const;
};

ScoreModel make_score_model(int data_dim, int n_classes, int T,
                            const std::vector<int>& hidden, Activation act,
                            std::uint64_t seed, int time_dim = 16, int cond_dim = 8);

struct DiffusionSample {
    Vector x0;
    int t = 0;
    Vector eps;
    Vector xt;
};

// xt = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps for a given draw.
DiffusionSample forward_noise_with(const NoiseSchedule& sched, const Vector& x0, int t,
                                   const Vector& eps);
// Same with eps ~ N(0, I) from rng.
DiffusionSample forward_noise(const NoiseSchedule& sched, const Vector& x0, int t, Rng& rng);

struct TrainOptions {
    int steps = 4000;
    int batch = 128;
    double lr = 1e-3;
    double p_uncond = 0.1;
    std::uint64_t seed = 0;
    double holdout_fraction = 0.1;
    int eval_every = 100;
};

struct TrainResult {
    std::vector<double> loss_curve;                    // per training step
    std::vector<std::pair<int, double>> holdout_curve; // (step, held-out loss)
};

// Denoising score matching: minimize mean_batch ||eps - eps_theta(xt,t,c)||^2
// over random (x0, t, eps); with probability p_uncond the class embedding is
// replaced by the null condition. Throws ComputeError on divergence.
TrainResult train_score_model(ScoreModel& model, const Matrix& data,
                              const std::vector<int>& labels, const NoiseSchedule& sched,
                              const TrainOptions& opts);

// Eq.-(1)-style inversion: x0_hat = (xt - sqrt(1 - alpha_bar_t) eps) / sqrt(alpha_bar_t).
Vector predict_clean_from_eps(const NoiseSchedule& sched, const Vector& xt, int t,
                              const Vector& eps);
Vector predict_clean(const ScoreModel& model, const NoiseSchedule& sched, const Vector& xt,
                     int t, int cond);

// Classifier-free guidance: (1 + w) eps(c) - w eps(null); w == 0 is the plain
// conditional prediction and skips the unconditional pass.
Vector predict_eps_cfg(const ScoreModel& model, const Vector& xt, int t, int cond, double w);

}  // namespace sfwlab
