#include "vne/optimize.hpp"

#include <cmath>

#include "vne/rng.hpp"

namespace vne {

Trajectory optimize_vne(const OptimizeConfig& cfg) {
    if (cfg.n < 1) throw Error("n must be >= 1");
    if (cfg.d < 1) throw Error("d must be >= 1");
    if (cfg.steps < 1) throw Error("steps must be >= 1");
    if (cfg.step_size < 0.0) throw Error("step_size must be >= 0");
    if (cfg.record_every < 1) throw Error("record_every must be >= 1");

    Rng rng(cfg.seed);
    RepresentationMatrix raw;
    raw.m = rng.gaussian_matrix(cfg.n, cfg.d);
    RepresentationMatrix z = normalize_rows(raw);

    const double sign = (cfg.mode == OptimizeMode::Maximize) ? 1.0 : -1.0;

    Trajectory traj;
    int done = 0;
    for (int step = 0; step < cfg.steps; ++step) {
        auto [val, grad] = vne_gradient(z);
        if (cfg.mode == OptimizeMode::Minimize && val.entropy < 1e-6) break;  // early stop
        if (step % cfg.record_every == 0) traj.entropy_history.emplace_back(step, val.entropy);
        if (cfg.step_size != 0.0) {  // step-size 0 keeps the iterate exactly
            raw.m = z.m + sign * cfg.step_size * grad;
            if (!raw.m.allFinite()) throw NonFinite("iterate diverged; lower the step size");
            raw.normalized = false;
            z = normalize_rows(raw);
        }
        done = step + 1;
    }
    traj.entropy_history.emplace_back(done, vne_of(z).entropy);

    traj.final_h = z;
    traj.final_spectrum = spectrum(z, SpectrumPath::Auto);
    return traj;
}

}  // namespace vne
