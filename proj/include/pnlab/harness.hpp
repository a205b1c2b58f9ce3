#pragma once

#include <map>
#include <string>
#include <vector>

#include "pnlab/corrector_solver.hpp"
#include "pnlab/evolution.hpp"
#include "pnlab/grid_function.hpp"
#include "pnlab/layer_solver.hpp"
#include "pnlab/particle_dynamics.hpp"
#include "pnlab/stress.hpp"

namespace pnlab {

/// Crossing positions and bulk L1 errors of evolution runs against the particle trajectory.
struct ConvergenceReport {
    std::vector<double> epsilons;
    std::vector<double> times;
    std::vector<std::vector<double>> crossing_errors;  // [eps][time] max_i |xi_i - x_i|
    std::vector<std::vector<double>> l1_bulk_errors;   // [eps][time] off-collar L1 distance
    std::vector<std::vector<std::vector<double>>> crossings;  // [eps][time][i]
    bool monotone_in_epsilon = false;  // errors at the final time strictly decrease with eps
    double collar = 0.5;
};

/// One evolution sample set per epsilon (states at `times`) against the particle samples at
/// the same times. Throws TopologyError if any state lacks exactly one upcrossing per level,
/// ArgumentError if the sample times disagree.
ConvergenceReport compare_to_particles(const std::vector<std::vector<EvolutionState>>& runs,
                                       const Trajectory& ode, double collar = 0.5);

// The ansatz samples u and psi at |z| up to (xbar_N - xbar_1 + margin) / eps; beyond their
// windows the power tails stand in, and their error is amplified by eps^-2s in I. Keep the
// margin small and the layer window wide when eps is small.
struct SupersolutionOptions {
    double margin = 5.0;   // window = [xbar_1 - margin, xbar_N + margin]
    double dx = 0.0;       // 0: epsilon * (layer dx)
};

struct SupersolutionReport {
    double epsilon = 0.0;
    double delta = 0.0;
    double time = 0.0;
    double grid_min_I = 0.0;
    double x_at_min = 0.0;
    GridFunction I_field;
    std::map<std::string, double> error_terms;
};

/// Case-split exponent (theta - 2s) / (2 theta) used to label the core |x - xbar_i| < eps^g.
double case_split_exponent(double s);

/// I_eps = eps vbar_t + eps^-2s W'(vbar) - L_s vbar - sigma for the corrected ansatz
///   vbar = eps^2s (delta + sigma)/beta + sum_i [u((x - xbar_i)/eps) - eps^2s cbar_i psi((x - xbar_i)/eps)]
/// at the shifted positions xbar = state.positions (state.delta = delta, state.shifted), with
/// cbar_i from velocity() and vbar_t by the chain rule (including d cbar_i / dt).
/// Throws ConfigError if the corrector is missing or delta <= 0.
SupersolutionReport supersolution_discrepancy(const LayerProfile& layer,
                                              const CorrectorProfile* corrector,
                                              const Potential& p, const StressField& sigma,
                                              const ParticleState& state, double epsilon,
                                              const SupersolutionOptions& options = {});

/// Largest entry e of `epsilons` such that min_I[k] >= level for every epsilons[k] <= e;
/// NaN if the smallest epsilon already fails. Sizes must match.
double positivity_threshold(const std::vector<double>& epsilons, const std::vector<double>& min_I,
                            double level);

/// Homogenization scenario shared by every epsilon of a sweep.
struct SweepScenario {
    std::vector<double> positions;
    double gamma = 0.0;                 // mobility used by the particle ODE
    StressField sigma;
    double t_end = 1.0;
    std::vector<double> sample_times;   // sorted, inside [0, t_end]
    EvolutionConfig evolution;
    IntegrateOptions ode;
    double collar = 0.5;
};

struct SweepResult {
    ConvergenceReport report;
    Trajectory ode;
    std::vector<std::vector<EvolutionState>> runs;  // [eps][sample]
    std::vector<double> seconds;                    // wall time per epsilon
};

/// Evolves the scenario for every epsilon (up to `jobs` at once; results do not depend on
/// jobs) and compares against the particle trajectory.
SweepResult run_homogenization_sweep(const LayerProfile& layer, const Potential& p,
                                     const std::vector<double>& epsilons,
                                     const SweepScenario& scenario, int jobs = 1);

struct PositivitySweep {
    std::vector<double> epsilons;
    std::vector<double> grid_min_I;
    std::vector<SupersolutionReport> reports;  // I_field dropped unless keep_fields
    double level = 0.0;
    double epsilon_star = 0.0;                 // NaN if even the smallest epsilon fails
};

/// supersolution_discrepancy over an epsilon ladder at one state, with the macro grid
/// dx = dx_factor * epsilon. epsilon_star from positivity_threshold at `level`.
PositivitySweep run_positivity_sweep(const LayerProfile& layer, const CorrectorProfile& corrector,
                                     const Potential& p, const StressField& sigma,
                                     const ParticleState& state,
                                     const std::vector<double>& epsilons, double margin,
                                     double dx_factor, double level, int jobs = 1,
                                     bool keep_fields = false);

}  // namespace pnlab
