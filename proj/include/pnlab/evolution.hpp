#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pnlab/frac_operator.hpp"
#include "pnlab/grid_function.hpp"
#include "pnlab/layer_solver.hpp"
#include "pnlab/potential.hpp"
#include "pnlab/stress.hpp"

namespace pnlab {

enum class Scheme { explicit_euler, imex_reaction };
std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct EvolutionConfig {
    double dt_safety = 0.9;                 // fraction of the Gershgorin step bound, in (0, 1]
    Scheme scheme = Scheme::explicit_euler;
    double margin = 20.0;                   // window = [x_1 - margin, x_N + margin] unless set
    double x_min = std::numeric_limits<double>::quiet_NaN();
    double x_max = std::numeric_limits<double>::quiet_NaN();
    double dx = 0.0;                        // 0: epsilon * (layer dx), aligned with the layer grid
    double band_slack = 0.25;               // sanity band [-slack, N + slack]
};

/// Rescaled field v_eps on a fixed window. The tail is layer-asymptotic with limits 0 and N
/// (shifted by eps^2s sigma / beta at the edges for nonzero stress) and coefficients matched
/// at the edges to the sum of the N layer tails around the current crossings.
struct EvolutionState {
    double epsilon = 0.0;
    double time = 0.0;
    int transitions = 0;
    GridFunction field;
    EvolutionConfig config;
};

/// Time stepper for (v_eps)_t = (1/eps) (L_s v_eps - eps^-2s W'(v_eps) + sigma(t, x)).
/// Owns the discrete operator of one window, so build one per (epsilon, window).
class Evolver {
public:
    /// Builds the window around positions0 (sorted). Throws ConfigError if dx > eps/8,
    /// epsilon <= 0, positions unsorted or the window misses a particle.
    Evolver(const LayerProfile& layer, const Potential& p, double epsilon,
            const std::vector<double>& positions0, const EvolutionConfig& config = {});

    const Grid& grid() const noexcept { return grid_; }
    double epsilon() const noexcept { return eps_; }
    /// Step used by step() (before shortening to hit sample times).
    double stable_dt() const noexcept { return dt_; }

    /// v(x) = (eps^2s / beta) sigma(0, x) + sum_i u((x - x_i) / eps).
    EvolutionState initial_condition(const StressField& sigma) const;

    /// Right-hand side (v_eps)_t at interior nodes (edges 0).
    std::vector<double> rate(const EvolutionState& st, const StressField& sigma) const;

    /// One step of length min(dt, stable_dt()). Throws InstabilityError if the field leaves
    /// the sanity band.
    EvolutionState step(const EvolutionState& st, const StressField& sigma, double dt) const;
    EvolutionState step(const EvolutionState& st, const StressField& sigma) const
    {
        return step(st, sigma, dt_);
    }

    /// Steps to t_end, returning snapshots at the sorted sample_times (within [time, t_end]).
    std::vector<EvolutionState> run(EvolutionState st, const StressField& sigma, double t_end,
                                    const std::vector<double>& sample_times) const;

private:
    void retail(EvolutionState& st, const StressField& sigma) const;
    void react(std::vector<double>& v, double dt) const;

    Potential pot_;
    double s_;
    double eps_;
    double eps2s_;
    double tail_left_;    // layer tail coefficients in layer units
    double tail_right_;
    GridFunction layer_u_;
    Grid grid_;
    std::unique_ptr<FracOperator> op_;
    std::vector<double> positions0_;
    double center_ = 0.0;
    double dt_ = 0.0;
    EvolutionConfig cfg_;
};

/// Upcrossings of the levels i - 1/2 (i = 1..n_levels) by piecewise-linear interpolation,
/// leftmost bracket first. Throws TopologyError if a level has no crossing.
std::vector<double> half_level_crossings(const GridFunction& v, int n_levels);

/// Number of upcrossings of each level i - 1/2 (diagnostic; all ones for separated layers).
std::vector<int> crossing_counts(const GridFunction& v, int n_levels);

}  // namespace pnlab
