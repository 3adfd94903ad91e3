#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vne/entropy.hpp"
#include "vne/repr.hpp"

namespace vne {

enum class OptimizeMode { Maximize, Minimize };

struct OptimizeConfig {
    Eigen::Index n = 16;
    Eigen::Index d = 64;
    OptimizeMode mode = OptimizeMode::Maximize;
    int steps = 2000;
    double step_size = 0.05;
    std::uint64_t seed = 42;
    int record_every = 10;
};

struct Trajectory {
    std::vector<std::pair<int, double>> entropy_history;  // (step, entropy)
    RepresentationMatrix final_h;                          // row-normalized
    Spectrum final_spectrum;
};

// Projected gradient ascent/descent of the entropy on the unit-row manifold:
// start from seeded Gaussian rows (normalized), step along +-step_size * dS/dH,
// re-normalize after every step. Minimize stops early below entropy 1e-6.
Trajectory optimize_vne(const OptimizeConfig& cfg);

}  // namespace vne
