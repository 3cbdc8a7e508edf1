// Reverse-time samplers: vanilla DDIM, always-on manifold-preserving SFW
// correction, conditional trajectory correction (CTC), and the negative
// classifier guidance (NCG) baseline that differentiates through eps_theta.
//
// rng contract: every step consumes exactly the same draws in every guidance
// mode (the transition noise when ddim_eta > 0, nothing otherwise), so a
// never-firing threshold makes ctc bit-identical to off.
#pragma once

#include "sfwlab/diffusion.hpp"
#include "sfwlab/harm.hpp"
#include "sfwlab/latent.hpp"
#include "sfwlab/rng.hpp"
#include "sfwlab/schedule.hpp"
#include "sfwlab/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sfwlab {

enum class GuidanceMode { Off, Always, Ctc, Ncg };

std::string to_string(GuidanceMode m);
GuidanceMode guidance_mode_from_string(const std::string& s);

struct GuidanceConfig {
    GuidanceMode mode = GuidanceMode::Off;
    double eta = 0.25;       // p_h threshold for ctc
    double gamma = 1.0;      // correction step size
    double ddim_eta = 0.0;   // sigma_t scale; 0 = deterministic DDIM
    double cfg_scale = 0.0;  // classifier-free guidance weight w
};

// Noise-prediction source the samplers run against. The trained model is the
// production implementation; tests substitute oracles and frozen doubles.
class EpsSource {
public:
    virtual ~EpsSource() = default;
    virtual Vector eps(const Vector& xt, int t) const = 0;
    // Vector-Jacobian product d(sum(upstream .* eps)) / d xt; only the ncg
    // path needs it.
    virtual Vector input_vjp(const Vector& xt, int t, const Vector& upstream) const = 0;
};

// CFG-combined prediction from a ScoreModel at a fixed condition.
class ModelEpsSource final : public EpsSource {
public:
    ModelEpsSource(const ScoreModel& model, int cond, double cfg_scale)
        : model_(&model), cond_(cond), w_(cfg_scale) {}
    Vector eps(const Vector& xt, int t) const override;
    Vector input_vjp(const Vector& xt, int t, const Vector& upstream) const override;

private:
    const ScoreModel* model_;
    int cond_;
    double w_;
};

// sigma_t = ddim_eta * sqrt((1-ab_{t-1})/(1-ab_t)) * sqrt(1 - ab_t/ab_{t-1}).
double ddim_sigma(const NoiseSchedule& sched, int t, double ddim_eta);

// One reverse transition x_{t-1} ~ N(m_t, sigma^2 I) with
// m_t = sqrt(ab_{t-1}) x0_hat + sqrt(1 - ab_{t-1} - sigma^2) eps_hat.
// `noise` must be a unit-gaussian draw when sigma > 0 (callers own the rng
// so modes stay paired); it is ignored when sigma == 0.
Vector ddim_transition(const NoiseSchedule& sched, int t, const Vector& x0_hat,
                       const Vector& eps_hat, double sigma, const Vector& noise);

// Convenience single step from a model: predict eps, invert to x0_hat, apply
// the q_sigma transition. No guidance.
Vector ddim_step(const ScoreModel& model, const NoiseSchedule& sched, const Vector& xt, int t,
                 int cond, const GuidanceConfig& cfg, Rng& rng);

struct CorrectionResult {
    Vector x0;       // corrected clean-point prediction
    bool clipped = false;
};

// Gradient-descent correction on the clean-point prediction:
// x0 <- x0 - gamma * grad log p_h, with the gradient pulled back through the
// decoder when the trajectory lives in latent space. A clipped density
// gradient makes this a no-op.
CorrectionResult sfw_correct(const Vector& x0_hat, const HarmDensity& harm, const LinearAE& ae,
                             double gamma);

struct TrajectoryStep {
    int t = 0;
    double ph = 0.0;       // p_h of the decoded clean-point prediction
    bool corrected = false;
    int concept_id = -1;   // active concept in multi mode, -1 otherwise
    Vector x0_hat;         // pre-correction prediction (latent coords)
    Vector xt;             // state entering the step
};

struct TrajectoryRecord {
    std::vector<TrajectoryStep> steps;  // t = T .. 1
    Vector final_x0;                    // latent coords
    int corrected_steps = 0;
};

// Full reverse chain from x_T ~ N(0, I) under the configured guidance mode.
// `harm` may be null only in off mode. Throws ComputeError (with the step
// index) if the trajectory leaves the finite range.
TrajectoryRecord sample_trajectory(const EpsSource& eps_source, const NoiseSchedule& sched,
                                   const HarmDensity* harm, const LinearAE& ae,
                                   const GuidanceConfig& cfg, Rng& rng);
TrajectoryRecord sample_trajectory(const ScoreModel& model, const NoiseSchedule& sched, int cond,
                                   const HarmDensity* harm, const LinearAE& ae,
                                   const GuidanceConfig& cfg, Rng& rng);

// Single guided steps, exposed for tests and step-level tooling. Each returns
// the next state and the record row describing what happened at step t.
std::pair<Vector, TrajectoryStep> ctc_step(const EpsSource& eps_source,
                                           const NoiseSchedule& sched, const Vector& xt, int t,
                                           const HarmDensity& harm, const LinearAE& ae,
                                           const GuidanceConfig& cfg, Rng& rng);
std::pair<Vector, TrajectoryStep> ncg_step(const EpsSource& eps_source,
                                           const NoiseSchedule& sched, const Vector& xt, int t,
                                           const HarmDensity& harm, const LinearAE& ae,
                                           const GuidanceConfig& cfg, Rng& rng);

// Gradient of log p_h(decode(x0_hat(xt))) w.r.t. xt, through eps_theta.
GradLogResult ncg_grad(const EpsSource& eps_source, const NoiseSchedule& sched, const Vector& xt,
                       int t, const HarmDensity& harm, const LinearAE& ae);

}  // namespace sfwlab
