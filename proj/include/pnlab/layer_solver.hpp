#pragma once

#include <vector>

#include "pnlab/grid_function.hpp"
#include "pnlab/potential.hpp"

namespace pnlab {

struct LayerOptions {
    double half_width = 400.0;
    double dx = 0.05;
    double tol = 1e-6;             // sup norm of L_s u - W'(u) on the interior
    long max_steps = 1000000;      // relaxation budget
    int recenter_every = 10;       // relaxation steps between recentering / tail refits
    double newton_switch = 1e-3;   // residual at which Newton-GMRES takes over
    double pseudo_dt = 20.0;       // relaxation step of the semi-implicit flow
    int max_newton = 60;
    double tail_fraction = 0.25;   // outer fraction of each half window used for the tail fit
};

/// Basic layer: increasing solution of L_s u = W'(u), u(-inf) = 0, u(+inf) = 1, u(0) = 1/2.
struct LayerProfile {
    GridFunction u;    // tail: layer-asymptotic, limits 0 and 1, exponent 2s
    GridFunction du;   // tail: exponent 1+2s, both coefficients positive
    double s = 0.0;
    double gamma = 0.0;  // 1 / int u'^2
    double eta = 0.0;    // int u'^2 / W''(0)
    double beta = 0.0;   // W''(0)
    double residual_norm = 0.0;
    long relaxation_steps = 0;
    int newton_steps = 0;
};

/// Solves for the layer by semi-implicit relaxation of u_t = L_s u - W'(u) from
/// 1/2 + atan(x)/pi, then Newton-GMRES on the system bordered by the gauge u(0) = 1/2.
/// The grid window edges are tied to the tail model, whose coefficients are refitted
/// by least squares on the outer part of the window (exponent fixed to 2s).
/// Throws ConvergenceError (with the last residual) or SolverError (lost monotonicity).
LayerProfile solve_layer(const Potential& p, double s, const LayerOptions& options = {});

/// Theoretical decay exponent min{1+2s-(1-8s)^+, 8s}/2 of the corrected far field.
double theta_exponent(double s);

struct DecaySide {
    double slope = 0.0;              // log-log slope of |u - H|
    double prefactor = 0.0;          // exp(intercept) of that free fit
    double coefficient = 0.0;        // least-squares coefficient with the exponent fixed to 2s
    double corrected_slope = 0.0;    // slope of |u - H + c0 x/|x|^(1+2s)|, c0 = 1/(2s beta)
    double derivative_slope = 0.0;   // slope of |u'|
};

struct DecayReport {
    double fit_min = 0.0;
    double fit_max = 0.0;
    double expected_coefficient = 0.0;  // 1/(2s beta)
    double theta = 0.0;
    DecaySide left, right;
    // Rows x, |u - H|, corrected residual, local slope of |u - H| (both sides, x sorted).
    std::vector<std::vector<double>> rows;
};

/// Log-log fits of the far field on a <= |x| <= b, both sides. Requires 20 <= a,
/// b/a >= 4 and b inside the grid.
DecayReport verify_decay(const LayerProfile& profile, double a, double b);

/// Derivative of u by fourth-order centred differences (tail nodes used near the edges),
/// with the matching -(1+2s) power tail.
GridFunction layer_derivative(const GridFunction& u, double s);

/// gamma, eta from int u'^2 including the analytic tail pieces.
double derivative_energy(const GridFunction& du);

}  // namespace pnlab
