#include "pnlab/particle_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "pnlab/error.hpp"

namespace pnlab {

namespace {

using State = std::vector<double>;

void check_params(const ParticleState& st)
{
    if (!(st.s > 0.0 && st.s < 0.5)) throw ConfigError("particles.s must lie in (0, 1/2)");
    if (!(st.gamma > 0.0) || !std::isfinite(st.gamma))
        throw ConfigError("particles.gamma must be positive");
    if (!(st.delta >= 0.0)) throw ConfigError("particles.delta must be >= 0");
    if (st.positions.empty()) throw ConfigError("particles: at least one position required");
}

double smallest_gap(const State& x)
{
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < x.size(); ++i) g = std::min(g, x[i] - x[i - 1]);
    return g;
}

void rhs(const State& x, State& v, double t, double s, double gamma, double delta,
         const StressField& sigma)
{
    const std::size_t n = x.size();
    const double p = 2.0 * s;
    for (std::size_t i = 0; i < n; ++i) {
        double f = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = x[i] - x[j];
            const double ad = std::abs(d);
            if (!(ad > 0.0)) throw SingularityError("particles: coincident positions");
            f += d / (p * std::pow(ad, p + 1.0));
        }
        v[i] = gamma * (-delta - sigma(t, x[i]) + f);
    }
}

}  // namespace

std::vector<double> velocity(const ParticleState& st, const StressField& sigma)
{
    check_params(st);
    if (smallest_gap(st.positions) <= 0.0)
        throw SingularityError("particles: positions must be strictly increasing");
    State v(st.positions.size());
    rhs(st.positions, v, st.time, st.s, st.gamma, st.delta, sigma);
    return v;
}

Trajectory integrate(const ParticleState& st, const StressField& sigma, double t_end,
                     const std::vector<double>& sample_times, const IntegrateOptions& o)
{
    namespace odeint = boost::numeric::odeint;
    check_params(st);
    if (!(t_end > st.time)) throw ArgumentError("integrate: t_end must exceed the start time");
    if (!(o.rtol > 0.0)) throw ConfigError("particles.rtol must be positive");
    std::vector<double> times = sample_times;
    if (times.empty()) times = {st.time, t_end};
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < st.time || times[k] > t_end || (k > 0 && times[k] < times[k - 1]))
            throw ArgumentError("integrate: sample times must be sorted inside [start, t_end]");
    }

    State x = st.positions;
    if (st.delta > 0.0 && !st.shifted)
        for (double& xi : x) xi -= st.delta;
    const double g0 = smallest_gap(x);
    if (!(g0 > o.min_gap))
        throw SingularityError("particles: initial gap " + std::to_string(g0) + " below floor");

    auto system = [&](const State& y, State& dy, double t) {
        rhs(y, dy, t, st.s, st.gamma, st.delta, sigma);
    };
    const double atol = o.atol > 0.0 ? o.atol : o.rtol;
    auto stepper = odeint::make_dense_output(atol, o.rtol, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(x, st.time, std::min(o.initial_step, t_end - st.time));

    Trajectory out;
    out.min_gap = g0;
    auto record = [&](double t, const State& y) {
        ParticleState p = st;
        p.time = t;
        p.positions = y;
        p.shifted = true;
        out.samples.push_back(std::move(p));
    };
    std::size_t next = 0;
    while (next < times.size() && times[next] == st.time) {
        record(st.time, x);
        ++next;
    }

    State tmp(x.size());
    while (next < times.size()) {
        if (out.steps >= o.max_steps)
            throw ConvergenceError("particles: step budget exhausted", stepper.current_time());
        const double t1 = stepper.do_step(system).second;
        ++out.steps;
        const State& cur = stepper.current_state();
        for (double v : cur)
            if (!std::isfinite(v)) throw SingularityError("particles: non-finite position");
        const double g = smallest_gap(cur);
        out.min_gap = std::min(out.min_gap, g);
        if (!(g > o.min_gap))
            throw SingularityError("particles: near collision, gap " + std::to_string(g) +
                                   " at t=" + std::to_string(t1));
        while (next < times.size() && times[next] <= t1) {
            if (times[next] == t1) {
                record(t1, cur);
            } else {
                stepper.calc_state(times[next], tmp);
                record(times[next], tmp);
            }
            ++next;
        }
    }
    return out;
}

double two_body_gap(double g0, double s, double gamma, double t)
{
    const double q = 2.0 * s + 1.0;
    return std::pow(std::pow(g0, q) + gamma * q * t / s, 1.0 / q);
}

}  // namespace pnlab
