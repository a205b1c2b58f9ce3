#include "pnlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <future>
#include <cmath>
#include <limits>

#include "pnlab/error.hpp"
#include "pnlab/frac_operator.hpp"

namespace pnlab {

ConvergenceReport compare_to_particles(const std::vector<std::vector<EvolutionState>>& runs,
                                       const Trajectory& ode, double collar)
{
    if (!(collar > 0.0)) throw ArgumentError("compare: collar must be positive");
    ConvergenceReport rep;
    rep.collar = collar;
    for (const auto& s : ode.samples) rep.times.push_back(s.time);
    for (const auto& run : runs) {
        if (run.size() != ode.samples.size())
            throw ArgumentError("compare: evolution and particle sample counts differ");
        rep.epsilons.push_back(run.front().epsilon);
        std::vector<double> errs, l1s;
        std::vector<std::vector<double>> xs;
        for (std::size_t k = 0; k < run.size(); ++k) {
            const auto& st = run[k];
            const auto& x = ode.samples[k].positions;
            if (std::abs(st.time - ode.samples[k].time) > 1e-12 * std::max(1.0, st.time))
                throw ArgumentError("compare: sample times differ");
            const int n = static_cast<int>(x.size());
            if (st.transitions != n)
                throw ArgumentError("compare: particle and layer counts differ");
            const auto counts = crossing_counts(st.field, n);
            for (int c : counts)
                if (c != 1)
                    throw TopologyError("compare: a half level is crossed " + std::to_string(c) +
                                        " times at t = " + std::to_string(st.time) +
                                        ", eps = " + std::to_string(st.epsilon));
            const auto xi = half_level_crossings(st.field, n);
            double err = 0.0;
            for (int i = 0; i < n; ++i) err = std::max(err, std::abs(xi[i] - x[i]));
            // Off-collar L1 distance to sum_i H(x - x_i) (trapezoid on the window).
            const auto& g = st.field.grid;
            long double l1 = 0.0L;
            for (std::size_t j = 0; j < g.size; ++j) {
                const double xj = g.x(static_cast<std::ptrdiff_t>(j));
                bool in_collar = false;
                double h = 0.0;
                for (double xi0 : x) {
                    if (std::abs(xj - xi0) < collar) in_collar = true;
                    if (xj >= xi0) h += 1.0;
                }
                if (in_collar) continue;
                const double w = (j == 0 || j + 1 == g.size) ? 0.5 : 1.0;
                l1 += w * std::abs(st.field.values[j] - h);
            }
            errs.push_back(err);
            l1s.push_back(static_cast<double>(l1) * g.dx);
            xs.push_back(xi);
        }
        rep.crossing_errors.push_back(std::move(errs));
        rep.l1_bulk_errors.push_back(std::move(l1s));
        rep.crossings.push_back(std::move(xs));
    }
    // Order epsilons decreasing and require strictly smaller final errors as eps shrinks.
    std::vector<std::size_t> order(rep.epsilons.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return rep.epsilons[a] > rep.epsilons[b]; });
    rep.monotone_in_epsilon = order.size() >= 2;
    for (std::size_t k = 1; k < order.size(); ++k)
        if (!(rep.crossing_errors[order[k]].back() < rep.crossing_errors[order[k - 1]].back()))
            rep.monotone_in_epsilon = false;
    return rep;
}

double case_split_exponent(double s)
{
    const double th = theta_exponent(s);
    return (th - 2.0 * s) / (2.0 * th);
}

SupersolutionReport supersolution_discrepancy(const LayerProfile& layer,
                                              const CorrectorProfile* corrector,
                                              const Potential& p, const StressField& sigma,
                                              const ParticleState& state, double eps,
                                              const SupersolutionOptions& o)
{
    if (corrector == nullptr || corrector->psi.size() == 0)
        throw ConfigError("supersol: a corrector profile is required");
    if (!(state.delta > 0.0)) throw ConfigError("supersol: delta must be positive");
    if (!(eps > 0.0)) throw ConfigError("supersol: epsilon must be positive");
    if (!state.shifted)
        throw ArgumentError("supersol: positions must be those of the shifted system");
    if (std::abs(corrector->s - layer.s) > 1e-15 || std::abs(state.s - layer.s) > 1e-15)
        throw ConfigError("supersol: layer, corrector and particle orders differ");

    const double s = layer.s;
    const double p2 = 2.0 * s;
    const double e2s = std::pow(eps, p2);
    const double beta = p.beta();
    const double t = state.time;
    const auto& xb = state.positions;
    const std::size_t n = xb.size();

    // cbar_i and d cbar_i / dt along the shifted system.
    const auto c = velocity(state, sigma);
    std::vector<double> dc(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = -sigma.dt(t, xb[i]) - sigma.dx(t, xb[i]) * c[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            acc -= std::pow(std::abs(xb[i] - xb[j]), -p2 - 1.0) * (c[i] - c[j]);
        }
        dc[i] = state.gamma * acc;
    }

    Grid g;
    g.dx = o.dx > 0.0 ? o.dx : eps * layer.u.grid.dx;
    const double lo = xb.front() - o.margin, hi = xb.back() + o.margin;
    const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / g.dx));
    g.x_min = lo;
    g.size = cells + 1;
    if (g.size < 40) throw ConfigError("supersol: window holds fewer than 40 cells");

    const auto& u = layer.u;
    const auto& du = layer.du;
    const auto& psi = corrector->psi;
    auto sig_t = [&](double x) { return (state.delta + sigma(t, x)) / beta; };
    std::vector<double> v(g.size), vt(g.size);
    for (std::size_t k = 0; k < g.size; ++k) {
        const double x = g.x(static_cast<std::ptrdiff_t>(k));
        double a = e2s * sig_t(x);
        double b = e2s * sigma.dt(t, x) / beta;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (x - xb[i]) / eps;
            a += u.sample(z) - e2s * c[i] * psi.sample(z);
            b += -c[i] * du.sample(z) / eps + e2s * c[i] * c[i] * psi.sample_derivative(z) / eps -
                 e2s * dc[i] * psi.sample(z);
        }
        v[k] = a;
        vt[k] = b;
    }
    // Exterior: power tails in |x - centre|^-2s with limits eps^2s sigma~ and N + eps^2s sigma~,
    // coefficients matched to vbar at the edge nodes.
    double centre = 0.0;
    for (double x : xb) centre += x;
    centre /= static_cast<double>(n);
    const double x0 = g.x_min, x1 = g.x_max();
    const double ll = e2s * sig_t(x0), rl = static_cast<double>(n) + e2s * sig_t(x1);
    const double al = (v.front() - ll) * std::pow(std::abs(x0 - centre), p2);
    const double ar = (v.back() - rl) * std::pow(std::abs(x1 - centre), p2);
    const GridFunction vbar(g, v, TailModel::layer(ll, rl, al, ar, p2, centre));

    const FracOperator op(g, s);
    const auto lv = op.apply(vbar);

    SupersolutionReport rep;
    rep.epsilon = eps;
    rep.delta = state.delta;
    rep.time = t;
    std::vector<double> I(g.size, 0.0);
    const double split = std::pow(eps, case_split_exponent(s));
    double min_all = std::numeric_limits<double>::infinity(), x_min = 0.0;
    double min_core = min_all, min_far = min_all, max_time = 0.0, max_react = 0.0;
    long double far_sum = 0.0L;
    long far_count = 0;
    for (std::size_t k = 1; k + 1 < g.size; ++k) {
        const double x = g.x(static_cast<std::ptrdiff_t>(k));
        const double time_term = eps * vt[k];
        const double react = p.dW(v[k]) / e2s;
        I[k] = time_term + react - lv[k] - sigma(t, x);
        if (I[k] < min_all) {
            min_all = I[k];
            x_min = x;
        }
        double dist = std::numeric_limits<double>::infinity();
        for (double xi : xb) dist = std::min(dist, std::abs(x - xi));
        if (dist < split) {
            min_core = std::min(min_core, I[k]);
        } else {
            min_far = std::min(min_far, I[k]);
            far_sum += I[k];
            ++far_count;
        }
        max_time = std::max(max_time, std::abs(time_term));
        max_react = std::max(max_react, std::abs(react));
    }
    I.front() = I[1];
    I.back() = I[g.size - 2];
    rep.grid_min_I = min_all;
    rep.x_at_min = x_min;
    rep.I_field = GridFunction(g, std::move(I));
    rep.error_terms = {
        {"case_split_radius", split},
        {"min_I_core", min_core},
        {"min_I_far", min_far},
        {"mean_I_far", far_count ? static_cast<double>(far_sum) / far_count : 0.0},
        {"max_abs_time_term", max_time},
        {"max_abs_reaction_term", max_react},
        {"min_I_minus_delta", min_all - state.delta},
        {"edge_tail_mismatch", vbar.stitch_mismatch()},
    };
    return rep;
}

double positivity_threshold(const std::vector<double>& epsilons, const std::vector<double>& min_I,
                            double level)
{
    if (epsilons.size() != min_I.size() || epsilons.empty())
        throw ArgumentError("positivity_threshold: need matching, non-empty inputs");
    std::vector<std::size_t> order(epsilons.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return epsilons[a] < epsilons[b]; });
    double best = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k : order) {
        if (!(min_I[k] >= level)) break;
        best = epsilons[k];
    }
    return best;
}

namespace {

// Runs task(i) for i in [0, n) with at most `jobs` in flight; exceptions propagate in index order.
void for_each_job(std::size_t n, int jobs, const std::function<void(std::size_t)>& task)
{
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::vector<std::future<void>> pending(n);
    std::size_t started = 0, done = 0;
    while (done < n) {
        while (started < n && started - done < static_cast<std::size_t>(jobs)) {
            pending[started] = std::async(std::launch::async, task, started);
            ++started;
        }
        pending[done].get();
        ++done;
    }
}

}  // namespace

SweepResult run_homogenization_sweep(const LayerProfile& layer, const Potential& p,
                                     const std::vector<double>& epsilons,
                                     const SweepScenario& sc, int jobs)
{
    if (epsilons.empty()) throw ArgumentError("sweep: no epsilons");
    if (sc.sample_times.empty()) throw ArgumentError("sweep: no sample times");
    ParticleState ps;
    ps.positions = sc.positions;
    ps.s = layer.s;
    ps.gamma = sc.gamma;
    SweepResult out;
    out.ode = integrate(ps, sc.sigma, sc.t_end, sc.sample_times, sc.ode);
    out.runs.resize(epsilons.size());
    out.seconds.resize(epsilons.size());
    for_each_job(epsilons.size(), jobs, [&](std::size_t k) {
        const auto t0 = std::chrono::steady_clock::now();
        const Evolver ev(layer, p, epsilons[k], sc.positions, sc.evolution);
        out.runs[k] = ev.run(ev.initial_condition(sc.sigma), sc.sigma, sc.t_end, sc.sample_times);
        out.seconds[k] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    out.report = compare_to_particles(out.runs, out.ode, sc.collar);
    return out;
}

PositivitySweep run_positivity_sweep(const LayerProfile& layer, const CorrectorProfile& corrector,
                                     const Potential& p, const StressField& sigma,
                                     const ParticleState& state,
                                     const std::vector<double>& epsilons, double margin,
                                     double dx_factor, double level, int jobs, bool keep_fields)
{
    if (epsilons.empty()) throw ArgumentError("supersol: no epsilons");
    if (!(dx_factor > 0.0)) throw ConfigError("supersol: dx_factor must be positive");
    PositivitySweep out;
    out.epsilons = epsilons;
    out.level = level;
    out.grid_min_I.resize(epsilons.size());
    out.reports.resize(epsilons.size());
    for_each_job(epsilons.size(), jobs, [&](std::size_t k) {
        SupersolutionOptions o;
        o.margin = margin;
        o.dx = dx_factor * epsilons[k];
        auto r = supersolution_discrepancy(layer, &corrector, p, sigma, state, epsilons[k], o);
        if (!keep_fields) r.I_field = GridFunction();
        out.grid_min_I[k] = r.grid_min_I;
        out.reports[k] = std::move(r);
    });
    out.epsilon_star = positivity_threshold(out.epsilons, out.grid_min_I, level);
    return out;
}

}  // namespace pnlab
