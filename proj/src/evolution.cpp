#include "pnlab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pnlab/error.hpp"

namespace pnlab {

std::string to_string(Scheme scheme)
{
    return scheme == Scheme::explicit_euler ? "explicit" : "imex-reaction";
}

Scheme scheme_from_string(const std::string& name)
{
    if (name == "explicit") return Scheme::explicit_euler;
    if (name == "imex-reaction" || name == "imex") return Scheme::imex_reaction;
    throw ConfigError("evolution.scheme must be 'explicit' or 'imex-reaction', got '" + name + "'");
}

Evolver::Evolver(const LayerProfile& layer, const Potential& p, double epsilon,
                 const std::vector<double>& positions0, const EvolutionConfig& config)
    : pot_(p), s_(layer.s), eps_(epsilon), layer_u_(layer.u), positions0_(positions0),
      cfg_(config)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw ConfigError("evolution.epsilon must be positive");
    if (positions0.empty()) throw ConfigError("evolution: at least one position required");
    for (std::size_t i = 1; i < positions0.size(); ++i)
        if (!(positions0[i] > positions0[i - 1]))
            throw ConfigError("evolution: positions must be strictly increasing");
    if (!(cfg_.dt_safety > 0.0 && cfg_.dt_safety <= 1.0))
        throw ConfigError("evolution.dt_safety must lie in (0, 1]");
    if (!(cfg_.margin > 0.0)) throw ConfigError("evolution.margin must be positive");

    eps2s_ = std::pow(eps_, 2.0 * s_);
    tail_left_ = layer.u.tail.left_coefficient;
    tail_right_ = layer.u.tail.right_coefficient;

    const double dx = cfg_.dx > 0.0 ? cfg_.dx : eps_ * layer.u.grid.dx;
    if (dx > eps_ / 8.0 * (1.0 + 1e-12))
        throw ConfigError("evolution.dx = " + std::to_string(dx) +
                          " does not resolve the layer (need dx <= epsilon/8)");
    const double lo = std::isnan(cfg_.x_min) ? positions0.front() - cfg_.margin : cfg_.x_min;
    const double hi = std::isnan(cfg_.x_max) ? positions0.back() + cfg_.margin : cfg_.x_max;
    if (!(lo < positions0.front() && hi > positions0.back()))
        throw ConfigError("evolution: window does not contain every initial position");
    // Put x_1 on a node so that a lone layer is sampled exactly at the layer's own nodes.
    const double left_cells = std::ceil((positions0.front() - lo) / dx - 1e-9);
    const double right_cells = std::ceil((hi - positions0.front()) / dx - 1e-9);
    grid_.dx = dx;
    grid_.x_min = positions0.front() - left_cells * dx;
    grid_.size = static_cast<std::size_t>(left_cells + right_cells) + 1;
    if (grid_.size < 40) throw ConfigError("evolution: window holds fewer than 40 cells");
    op_ = std::make_unique<FracOperator>(grid_, s_);
    center_ = 0.5 * (positions0.front() + positions0.back());

    const double g = op_->gershgorin_bound();
    double rate_bound = g / eps_;
    if (cfg_.scheme == Scheme::explicit_euler) rate_bound += pot_.max_curvature() / (eps_ * eps2s_);
    dt_ = cfg_.dt_safety * 2.0 / rate_bound;
}

void Evolver::retail(EvolutionState& st, const StressField& sigma) const
{
    const int n = st.transitions;
    const double x0 = grid_.x_min, x1 = grid_.x_max();
    std::vector<double> centres;
    try {
        centres = half_level_crossings(st.field, n);
    } catch (const TopologyError&) {
        centres = positions0_;
    }
    if (static_cast<int>(centres.size()) != n) centres = positions0_;
    const double p = 2.0 * s_;
    double al = 0.0, ar = 0.0;
    for (double c : centres) {
        al += tail_left_ * eps2s_ * std::pow(std::abs(x0 - c), -p);
        ar += tail_right_ * eps2s_ * std::pow(std::abs(x1 - c), -p);
    }
    al *= std::pow(std::abs(x0 - center_), p);
    ar *= std::pow(std::abs(x1 - center_), p);
    const double beta = pot_.beta();
    const double lo = eps2s_ * sigma(st.time, x0) / beta;
    const double hi = n + eps2s_ * sigma(st.time, x1) / beta;
    st.field.tail = TailModel::layer(lo, hi, al, ar, p, center_);
    st.field.values.front() = st.field.tail.left(x0);
    st.field.values.back() = st.field.tail.right(x1);
}

EvolutionState Evolver::initial_condition(const StressField& sigma) const
{
    EvolutionState st;
    st.epsilon = eps_;
    st.time = 0.0;
    st.transitions = static_cast<int>(positions0_.size());
    st.config = cfg_;
    std::vector<double> v(grid_.size);
    const double beta = pot_.beta();
    for (std::size_t i = 0; i < grid_.size; ++i) {
        const double x = grid_.x(static_cast<std::ptrdiff_t>(i));
        double acc = eps2s_ * sigma(0.0, x) / beta;
        for (double xi : positions0_) acc += layer_u_.sample((x - xi) / eps_);
        v[i] = acc;
    }
    st.field = GridFunction(grid_, std::move(v));
    retail(st, sigma);
    return st;
}

std::vector<double> Evolver::rate(const EvolutionState& st, const StressField& sigma) const
{
    auto r = op_->apply(st.field);
    const double inv_e = 1.0 / eps_;
    const double react = 1.0 / eps2s_;
    for (std::size_t i = 1; i + 1 < grid_.size; ++i) {
        const double x = grid_.x(static_cast<std::ptrdiff_t>(i));
        r[i] = inv_e * (r[i] - react * pot_.dW(st.field.values[i]) + sigma(st.time, x));
    }
    return r;
}

void Evolver::react(std::vector<double>& v, double dt) const
{
    // v_t = -eps^(-1-2s) W'(v) pointwise on the interior.
    const double k = 1.0 / (eps_ * eps2s_);
    const auto& a = pot_.coefficients();
    if (a.size() == 1) {
        // W' = 2 pi a sin(2 pi v): tan(pi (v - m)) decays like exp(-4 pi^2 a k t).
        const double decay = std::exp(-4.0 * std::numbers::pi * std::numbers::pi * a[0] * k * dt);
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            const double m = std::round(v[i]);
            const double y = std::tan(std::numbers::pi * (v[i] - m)) * decay;
            v[i] = m + std::atan(y) / std::numbers::pi;
        }
        return;
    }
    const int sub = std::max(1, static_cast<int>(std::ceil(dt * k * pot_.max_curvature() / 0.5)));
    const double h = dt / sub;
    auto f = [&](double y) { return -k * pot_.dW(y); };
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        double y = v[i];
        for (int j = 0; j < sub; ++j) {
            const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2),
                         k4 = f(y + h * k3);
            y += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        v[i] = y;
    }
}

EvolutionState Evolver::step(const EvolutionState& st, const StressField& sigma, double dt) const
{
    dt = std::min(dt, dt_);
    if (!(dt > 0.0)) throw ArgumentError("evolution: step must be positive");
    EvolutionState next = st;
    auto& v = next.field.values;
    if (cfg_.scheme == Scheme::explicit_euler) {
        const auto r = rate(st, sigma);
        for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] += dt * r[i];
    } else {
        auto r = op_->apply(st.field);
        const double inv_e = 1.0 / eps_;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            const double x = grid_.x(static_cast<std::ptrdiff_t>(i));
            v[i] += dt * inv_e * (r[i] + sigma(st.time, x));
        }
        react(v, dt);
    }
    next.time = st.time + dt;
    const double lo = -cfg_.band_slack, hi = st.transitions + cfg_.band_slack;
    double worst = 0.0;
    bool bad = false;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (!(v[i] >= lo && v[i] <= hi)) {
            bad = true;
            worst = std::isfinite(v[i]) ? std::max(worst, std::abs(v[i])) : v[i];
        }
    }
    if (bad)
        throw InstabilityError("evolution left the band [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]: dt = " + std::to_string(dt) +
                               ", max |v| = " + std::to_string(worst));
    retail(next, sigma);
    return next;
}

std::vector<EvolutionState> Evolver::run(EvolutionState st, const StressField& sigma,
                                         double t_end, const std::vector<double>& sample_times) const
{
    for (std::size_t k = 0; k < sample_times.size(); ++k)
        if (sample_times[k] < st.time || sample_times[k] > t_end ||
            (k > 0 && sample_times[k] < sample_times[k - 1]))
            throw ArgumentError("evolution: sample times must be sorted inside [time, t_end]");
    std::vector<EvolutionState> out;
    std::size_t next = 0;
    while (next < sample_times.size() && sample_times[next] <= st.time) {
        out.push_back(st);
        ++next;
    }
    auto advance = [&](double target) {
        // Land on the target exactly: equal steps that do not exceed dt_.
        const double span = target - st.time;
        const auto count = static_cast<long>(std::ceil(span / dt_ - 1e-9));
        const double h = span / static_cast<double>(std::max(count, 1L));
        for (long j = 0; j < count; ++j) st = step(st, sigma, h);
        st.time = target;
    };
    while (next < sample_times.size()) {
        const double target = sample_times[next];
        advance(target);
        while (next < sample_times.size() && sample_times[next] <= target) {
            out.push_back(st);
            ++next;
        }
    }
    if (st.time < t_end) advance(t_end);
    return out;
}

std::vector<double> half_level_crossings(const GridFunction& v, int n_levels)
{
    const auto& f = v.values;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_levels));
    for (int i = 1; i <= n_levels; ++i) {
        const double level = i - 0.5;
        bool found = false;
        for (std::size_t j = 0; j + 1 < f.size(); ++j) {
            if (f[j] < level && f[j + 1] >= level) {
                const double r = (level - f[j]) / (f[j + 1] - f[j]);
                out.push_back(v.grid.x(static_cast<std::ptrdiff_t>(j)) + r * v.grid.dx);
                found = true;
                break;
            }
        }
        if (!found)
            throw TopologyError("no upcrossing of level " + std::to_string(level) +
                                " in the window");
    }
    return out;
}

std::vector<int> crossing_counts(const GridFunction& v, int n_levels)
{
    std::vector<int> counts(static_cast<std::size_t>(n_levels), 0);
    const auto& f = v.values;
    for (int i = 1; i <= n_levels; ++i) {
        const double level = i - 0.5;
        for (std::size_t j = 0; j + 1 < f.size(); ++j)
            if (f[j] < level && f[j + 1] >= level) ++counts[static_cast<std::size_t>(i - 1)];
    }
    return counts;
}

}  // namespace pnlab
