#include "sfwlab/schedule.hpp"

namespace sfwlab {

NoiseSchedule make_linear_schedule(int T, double beta_start, double beta_end) {
    if (T < 1) throw ConfigError("schedule: T must be >= 1");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw ConfigError("schedule: need 0 < beta_start <= beta_end < 1");

    NoiseSchedule s;
    s.T = T;
    s.betas = T == 1 ? Vector::Constant(1, beta_start)
                     : Vector::LinSpaced(T, beta_start, beta_end);
    s.alphas = 1.0 - s.betas.array();
    s.alpha_bars = Vector(T + 1);
    s.alpha_bars[0] = 1.0;
    for (int t = 1; t <= T; ++t) s.alpha_bars[t] = s.alpha_bars[t - 1] * s.alphas[t - 1];
    return s;
}

}  // namespace sfwlab
