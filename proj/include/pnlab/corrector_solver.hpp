#pragma once

#include <vector>

#include "pnlab/grid_function.hpp"
#include "pnlab/layer_solver.hpp"
#include "pnlab/potential.hpp"

namespace pnlab {

struct CorrectorOptions {
    double tol = 1e-6;  // grid L2 norm of the equation residual
    int restart = 80;
    int max_iter = 4000;
};

/// Corrector psi solving L_s psi - W''(u) psi = u' + eta (W''(u) - W''(0)), gauge <psi, u'> = 0.
struct CorrectorProfile {
    GridFunction psi;  // tail: power law of exponent 4s, equal coefficients on both sides
    double s = 0.0;
    double eta = 0.0;
    double residual_norm = 0.0;        // grid L2 norm of the equation residual (interior)
    double solvability_defect = 0.0;   // <g, u'> / (|g| |u'|) on the grid window
    double orthogonality_defect = 0.0; // <psi, u'> (grid trapezoid)
    int iterations = 0;
};

/// Right-hand side g = u' + eta (W''(u) - W''(0)) on the layer grid.
std::vector<double> corrector_rhs(const LayerProfile& layer, const Potential& p);

/// Solves the corrector on the layer's grid. The far field of psi is modelled as
/// a |x|^-4s (the balance psi ~ -eta (W''(u) - W''(0)) / W''(0) of the equation), and the
/// coefficient a is an unknown of the bordered system together with the grid values.
/// Throws ConfigError if the layer is not converged, ConvergenceError if the residual
/// target is missed and SolverError if the bordered system is singular.
CorrectorProfile solve_corrector(const LayerProfile& layer, const Potential& p,
                                 const CorrectorOptions& options = {});

/// Grid L2 norm of (L_s - W''(u)) u' relative to that of u' (translation mode check).
/// Only nodes within core_fraction of the half window enter the numerator: the pinned
/// window edges leave a thin boundary layer in u whose derivative is not a translation mode.
double kernel_defect(const LayerProfile& layer, const Potential& p, double core_fraction = 1.0);

struct WeakFormCheck {
    double max_relative = 0.0;  // max over test bumps of |R(phi)| / scale(phi)
    std::vector<double> centers;
    std::vector<double> relative;
};

/// Weak-form residual  Q(psi, phi)/2 + <W''(u) psi, phi> + <g, phi>  for smooth compact bumps
/// phi of half width `radius` centred at `centers`, relative to the sum of the magnitudes of
/// the three terms. Q is the whole-line energy pairing, whose factor 2 against -<phi, L psi>
/// is removed explicitly.
WeakFormCheck weak_form_residual(const LayerProfile& layer, const CorrectorProfile& corrector,
                                 const Potential& p, const std::vector<double>& centers,
                                 double radius);

}  // namespace pnlab
