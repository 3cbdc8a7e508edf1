// Noise schedule for the forward/reverse diffusion: beta_t, alpha_t = 1 - beta_t
// and the running product alpha_bar_t, with alpha_bar_0 == 1.
#pragma once

#include "sfwlab/types.hpp"

namespace sfwlab {

struct NoiseSchedule {
    int T = 0;
    Vector betas;       // betas[t-1] is beta_t, t in 1..T
    Vector alphas;      // 1 - beta
    Vector alpha_bars;  // alpha_bars[t] is the product over s<=t; [0] == 1

    double beta(int t) const { return betas[t - 1]; }
    double alpha(int t) const { return alphas[t - 1]; }
    double alpha_bar(int t) const { return alpha_bars[t]; }
};

// Linear beta interpolation from beta_start to beta_end over T steps.
NoiseSchedule make_linear_schedule(int T, double beta_start, double beta_end);

}  // namespace sfwlab
