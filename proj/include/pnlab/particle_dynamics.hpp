#pragma once

#include <vector>

#include "pnlab/stress.hpp"

namespace pnlab {

/// Positions of N same-orientation dislocation points.
/// delta = 0 selects the plain system, delta > 0 the shifted system
///     x_i' = gamma (-delta - sigma(t, x_i) + sum_{j != i} (x_i - x_j) / (2s |x_i - x_j|^(2s+1)))
/// started from x_i(t0) - delta. `shifted` records whether that initial shift is already
/// contained in `positions` (true for every state returned by integrate()).
struct ParticleState {
    double time = 0.0;
    std::vector<double> positions;
    double s = 0.25;
    double gamma = 1.0;
    double delta = 0.0;
    bool shifted = false;
};

/// Right-hand side at the state. Throws SingularityError on coincident or unsorted points.
std::vector<double> velocity(const ParticleState& st, const StressField& sigma);

struct IntegrateOptions {
    double rtol = 1e-8;
    double atol = 0.0;         // 0 means atol = rtol
    double min_gap = 1e-6;     // near-collision floor
    double initial_step = 1e-4;
    long max_steps = 10000000;
};

struct Trajectory {
    std::vector<ParticleState> samples;  // one per requested time, in order
    long steps = 0;                      // accepted steps
    double min_gap = 0.0;                // smallest gap seen at accepted steps
};

/// Adaptive Dormand-Prince 5(4) with dense output. sample_times must be sorted and lie in
/// [st.time, t_end]; an empty list samples st.time and t_end. Ordering and the gap floor are
/// checked at every accepted step (SingularityError). Throws ArgumentError for t_end <= time
/// or bad sample times, ConvergenceError if max_steps is exhausted.
Trajectory integrate(const ParticleState& st, const StressField& sigma, double t_end,
                     const std::vector<double>& sample_times, const IntegrateOptions& options = {});

/// Closed-form gap of two free particles: (g0^(2s+1) + gamma (2s+1) t / s)^(1/(2s+1)).
double two_body_gap(double g0, double s, double gamma, double t);

}  // namespace pnlab
