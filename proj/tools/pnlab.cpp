// pnlab command-line driver.
//
// Exit codes: 0 ok, 2 configuration or input error, 3 numerical failure (convergence,
// instability, collision, topology), 4 a requested acceptance predicate failed.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pnlab/archive.hpp"
#include "pnlab/config.hpp"
#include "pnlab/error.hpp"
#include "pnlab/frac_operator.hpp"
#include "pnlab/harness.hpp"

using namespace pnlab;
using json = nlohmann::ordered_json;

namespace {

struct Common {
    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    RunConfig cfg;
};

std::string output_path(const Common& c, const std::string& name)
{
    namespace fs = std::filesystem;
    if (fs::path(name).is_absolute()) return name;
    std::string dir = c.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("PNLAB_OUTPUT_DIR");
        dir = env && *env ? env : ".";
    }
    return (fs::path(dir) / name).string();
}

json to_json_number(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

void emit(const Common& c, const std::string& name, const json& report)
{
    const std::string text = report.dump(2) + "\n";
    write_atomic(output_path(c, name), text);
    std::cout << text;
}

std::vector<double> sample_grid(double t_end, int samples)
{
    std::vector<double> t;
    if (samples <= 1) return {t_end};
    for (int k = 0; k < samples; ++k) t.push_back(t_end * k / (samples - 1));
    t.back() = t_end;
    return t;
}

LayerProfile obtain_layer(const Common& c, const std::string& path)
{
    if (!path.empty()) {
        auto l = load_layer_profile(path);
        if (std::abs(l.s - c.cfg.op.s) > 0.0)
            std::cerr << "note: using s = " << l.s << " from " << path << "\n";
        return l;
    }
    return solve_layer(c.cfg.potential.build(), c.cfg.op.s, c.cfg.layer);
}

StressField stress(const Common& c, double x0, double x1, double t1)
{
    const auto sigma = StressField::parse(c.cfg.particles.sigma);
    const double m = c.cfg.particles.stress_bound;
    if (!std::isnan(m)) sigma.check_bound(m, x0, x1, 0.0, t1);
    return sigma;
}

double mobility(const Common& c, const LayerProfile* layer)
{
    if (!std::isnan(c.cfg.particles.gamma)) return c.cfg.particles.gamma;
    if (layer == nullptr) throw ConfigError("particles.gamma is required without a layer profile");
    return layer->gamma;
}

// ---- layer -----------------------------------------------------------------------------

struct LayerArgs {
    std::string out = "layer.csv";
    std::string decay_csv = "decay.csv";
    std::string dump_weights;
    double fit_min = 50.0, fit_max = 200.0;
};

void cmd_layer(const Common& c, const LayerArgs& a)
{
    const auto p = c.cfg.potential.build();
    const auto l = solve_layer(p, c.cfg.op.s, c.cfg.layer);
    save_profile(l, output_path(c, a.out));

    // Keep the fit window inside small windows (the default targets the 400 half width).
    double fit_max = a.fit_max, fit_min = a.fit_min;
    if (fit_max > 0.9 * l.u.grid.x_max()) {
        fit_max = 0.9 * l.u.grid.x_max();
        fit_min = 20.0;
        std::cerr << "note: fit window moved to [" << fit_min << ", " << fit_max << "]\n";
    }
    const auto d = verify_decay(l, fit_min, fit_max);
    std::string csv = csv_comment(config_hash(c.cfg));
    csv += "x,abs_u_minus_H,corrected_residual,local_slope\n";
    for (const auto& r : d.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) csv += (k ? "," : "") + format_double(r[k]);
        csv += "\n";
    }
    write_atomic(output_path(c, a.decay_csv), csv);

    if (!a.dump_weights.empty()) {
        const FracOperator op(l.u.grid, l.s);
        const auto row = op.row(l.u.grid.size / 2, l.u.tail);
        std::string w = csv_comment(config_hash(c.cfg));
        w += "# target " + std::to_string(row.target) + " left_limit_weight " +
             format_double(row.left_limit_weight) + " right_limit_weight " +
             format_double(row.right_limit_weight) + " left_coefficient_weight " +
             format_double(row.left_coefficient_weight) + " right_coefficient_weight " +
             format_double(row.right_coefficient_weight) + "\n";
        w += "j,x,weight\n";
        for (std::size_t j = 0; j < row.grid_weights.size(); ++j)
            w += std::to_string(j) + "," + format_double(l.u.grid.x(static_cast<std::ptrdiff_t>(j))) +
                 "," + format_double(row.grid_weights[j]) + "\n";
        write_atomic(output_path(c, a.dump_weights), w);
    }

    auto side = [](const DecaySide& s) {
        return json{{"slope", s.slope},
                    {"prefactor", s.prefactor},
                    {"coefficient", s.coefficient},
                    {"corrected_slope", s.corrected_slope},
                    {"derivative_slope", s.derivative_slope}};
    };
    json r;
    r["command"] = "layer";
    r["config_hash"] = config_hash(c.cfg);
    r["s"] = l.s;
    r["gamma"] = l.gamma;
    r["eta"] = l.eta;
    r["beta"] = l.beta;
    r["residual_norm"] = l.residual_norm;
    r["half_width"] = l.u.grid.x_max();
    r["dx"] = l.u.grid.dx;
    r["tail_coefficients"] = {l.u.tail.left_coefficient, l.u.tail.right_coefficient};
    r["theta"] = theta_exponent(l.s);
    r["decay"] = {{"fit_min", d.fit_min},
                  {"fit_max", d.fit_max},
                  {"expected_coefficient", d.expected_coefficient},
                  {"left", side(d.left)},
                  {"right", side(d.right)}};
    r["profile"] = a.out;
    emit(c, "layer.json", r);
}

// ---- corrector -------------------------------------------------------------------------

struct CorrectorArgs {
    std::string layer;
    std::string out = "corrector.csv";
};

void cmd_corrector(const Common& c, const CorrectorArgs& a)
{
    const auto p = c.cfg.potential.build();
    const auto l = obtain_layer(c, a.layer);
    const auto psi = solve_corrector(l, p, c.cfg.corrector);
    save_profile(psi, output_path(c, a.out));
    const double hw = l.u.grid.x_max();
    std::vector<double> centres;
    for (double x = -0.5 * hw; x <= 0.5 * hw + 1e-9; x += 0.125 * hw) centres.push_back(x);
    const auto weak = weak_form_residual(l, psi, p, centres, std::min(5.0, 0.05 * hw));
    double max_psi = 0.0;
    for (double v : psi.psi.values) max_psi = std::max(max_psi, std::abs(v));
    json r;
    r["command"] = "corrector";
    r["config_hash"] = config_hash(c.cfg);
    r["s"] = psi.s;
    r["eta"] = psi.eta;
    r["residual_norm"] = psi.residual_norm;
    r["iterations"] = psi.iterations;
    r["solvability_defect"] = psi.solvability_defect;
    r["orthogonality_defect"] = psi.orthogonality_defect;
    r["max_abs_psi"] = max_psi;
    r["tail_coefficient"] = psi.psi.tail.right_coefficient;
    r["weak_form_max_relative"] = weak.max_relative;
    r["kernel_defect_0.9"] = kernel_defect(l, p, 0.9);
    r["profile"] = a.out;
    emit(c, "corrector.json", r);
}

// ---- particles -------------------------------------------------------------------------

struct ParticlesArgs {
    std::string layer;
    std::string out = "particles.csv";
};

void cmd_particles(const Common& c, const ParticlesArgs& a)
{
    std::optional<LayerProfile> l;
    if (!a.layer.empty()) l = load_layer_profile(a.layer);
    const auto& q = c.cfg.particles;
    ParticleState st;
    st.positions = q.positions;
    st.s = l ? l->s : c.cfg.op.s;
    st.gamma = mobility(c, l ? &*l : nullptr);
    st.delta = q.delta;
    const auto sigma = stress(c, q.positions.front() - 100.0, q.positions.back() + 100.0, q.t_end);
    const auto tr = integrate(st, sigma, q.t_end, sample_grid(q.t_end, q.samples), q.integrate);

    std::string csv = csv_comment(config_hash(c.cfg));
    csv += "t";
    for (std::size_t i = 0; i < q.positions.size(); ++i) csv += ",x_" + std::to_string(i + 1);
    csv += "\n";
    for (const auto& s : tr.samples) {
        csv += format_double(s.time);
        for (double x : s.positions) csv += "," + format_double(x);
        csv += "\n";
    }
    write_atomic(output_path(c, a.out), csv);
    json r;
    r["command"] = "particles";
    r["config_hash"] = config_hash(c.cfg);
    r["s"] = st.s;
    r["gamma"] = st.gamma;
    r["delta"] = st.delta;
    r["sigma"] = sigma.describe();
    r["steps"] = tr.steps;
    r["min_gap"] = tr.min_gap;
    r["final_positions"] = tr.samples.back().positions;
    r["trajectory"] = a.out;
    emit(c, "particles.json", r);
}

// ---- evolve ----------------------------------------------------------------------------

struct EvolveArgs {
    std::string layer;
    std::string out = "evolve";
};

void cmd_evolve(const Common& c, const EvolveArgs& a)
{
    const auto p = c.cfg.potential.build();
    const auto l = obtain_layer(c, a.layer);
    const auto& e = c.cfg.evolution;
    const auto& x0 = c.cfg.particles.positions;
    const Evolver ev(l, p, e.epsilon, x0, e.stepper);
    const auto sigma = stress(c, ev.grid().x_min, ev.grid().x_max(), e.t_end);
    const auto times = sample_grid(e.t_end, e.samples);
    const auto runs = ev.run(ev.initial_condition(sigma), sigma, e.t_end, times);

    const std::string hash = config_hash(c.cfg);
    std::string crossings = csv_comment(hash) + "t";
    for (std::size_t i = 0; i < x0.size(); ++i) crossings += ",xi_" + std::to_string(i + 1);
    crossings += "\n";
    json files = json::array();
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& st = runs[k];
        std::string csv = csv_comment(hash) + "# t " + format_double(st.time) + "\nx,v\n";
        for (std::size_t i = 0; i < st.field.size(); ++i)
            csv += format_double(st.field.grid.x(static_cast<std::ptrdiff_t>(i))) + "," +
                   format_double(st.field.values[i]) + "\n";
        const std::string name = a.out + "_" + std::to_string(k) + ".csv";
        write_atomic(output_path(c, name), csv);
        files.push_back(name);
        crossings += format_double(st.time);
        for (double x : half_level_crossings(st.field, st.transitions))
            crossings += "," + format_double(x);
        crossings += "\n";
    }
    write_atomic(output_path(c, a.out + "_crossings.csv"), crossings);
    json r;
    r["command"] = "evolve";
    r["config_hash"] = hash;
    r["epsilon"] = e.epsilon;
    r["scheme"] = to_string(e.stepper.scheme);
    r["dt"] = ev.stable_dt();
    r["nodes"] = ev.grid().size;
    r["window"] = {ev.grid().x_min, ev.grid().x_max()};
    r["samples"] = files;
    r["crossings"] = a.out + "_crossings.csv";
    emit(c, a.out + ".json", r);
}

// ---- compare / sweep -------------------------------------------------------------------

SweepScenario scenario(const Common& c, const LayerProfile& l, const std::vector<double>& x0)
{
    const auto& e = c.cfg.evolution;
    SweepScenario sc;
    sc.positions = x0;
    sc.gamma = mobility(c, &l);
    sc.sigma = stress(c, x0.front() - e.stepper.margin, x0.back() + e.stepper.margin, e.t_end);
    sc.t_end = e.t_end;
    sc.sample_times = sample_grid(e.t_end, std::max(e.samples, 2));
    sc.evolution = e.stepper;
    sc.ode = c.cfg.particles.integrate;
    sc.collar = c.cfg.harness.collar;
    return sc;
}

// Returns the failed predicate descriptions (empty if none was requested or all hold).
std::vector<std::string> check_convergence(const Common& c, const ConvergenceReport& rep)
{
    std::vector<std::string> failed;
    const auto& h = c.cfg.harness;
    if (h.require_monotone && !rep.monotone_in_epsilon)
        failed.push_back("crossing errors are not strictly decreasing in epsilon");
    if (!std::isnan(h.max_final_error)) {
        std::size_t k = 0;
        for (std::size_t i = 1; i < rep.epsilons.size(); ++i)
            if (rep.epsilons[i] < rep.epsilons[k]) k = i;
        if (!(rep.crossing_errors[k].back() <= h.max_final_error))
            failed.push_back("final crossing error " + format_double(rep.crossing_errors[k].back()) +
                             " at the smallest epsilon exceeds " + format_double(h.max_final_error));
    }
    return failed;
}

json convergence_json(const ConvergenceReport& rep)
{
    json r;
    r["epsilons"] = rep.epsilons;
    r["times"] = rep.times;
    r["crossing_errors"] = rep.crossing_errors;
    r["l1_bulk_errors"] = rep.l1_bulk_errors;
    r["crossings"] = rep.crossings;
    r["monotone_in_epsilon"] = rep.monotone_in_epsilon;
    r["collar"] = rep.collar;
    return r;
}

std::string convergence_csv(const Common& c, const ConvergenceReport& rep, const std::string& tag)
{
    std::string csv = csv_comment(config_hash(c.cfg));
    csv += tag.empty() ? "epsilon,t,crossing_error,l1_bulk_error\n"
                       : "scenario,epsilon,t,crossing_error,l1_bulk_error\n";
    for (std::size_t k = 0; k < rep.epsilons.size(); ++k)
        for (std::size_t j = 0; j < rep.times.size(); ++j)
            csv += (tag.empty() ? "" : tag + ",") + format_double(rep.epsilons[k]) + "," +
                   format_double(rep.times[j]) + "," + format_double(rep.crossing_errors[k][j]) +
                   "," + format_double(rep.l1_bulk_errors[k][j]) + "\n";
    return csv;
}

struct CompareArgs {
    std::string layer;
    std::string out = "compare";
};

int cmd_compare(const Common& c, const CompareArgs& a)
{
    const auto p = c.cfg.potential.build();
    const auto l = obtain_layer(c, a.layer);
    const auto res = run_homogenization_sweep(l, p, c.cfg.evolution.epsilons,
                                              scenario(c, l, c.cfg.particles.positions), c.jobs);
    write_atomic(output_path(c, a.out + "_errors.csv"), convergence_csv(c, res.report, ""));
    const auto failed = check_convergence(c, res.report);
    json r;
    r["command"] = "compare";
    r["config_hash"] = config_hash(c.cfg);
    r["report"] = convergence_json(res.report);
    r["predicates_failed"] = failed;
    emit(c, a.out + ".json", r);
    for (std::size_t k = 0; k < res.seconds.size(); ++k)
        std::cerr << "eps " << res.report.epsilons[k] << ": " << res.seconds[k] << " s\n";
    if (!failed.empty()) throw AcceptanceError(failed.front());
    return 0;
}

struct SweepArgs {
    std::string layer;
    std::vector<std::string> position_sets;
    std::string out = "sweep";
};

int cmd_sweep(const Common& c, const SweepArgs& a)
{
    const auto p = c.cfg.potential.build();
    const auto l = obtain_layer(c, a.layer);
    std::vector<std::vector<double>> sets;
    if (a.position_sets.empty()) sets.push_back(c.cfg.particles.positions);
    for (const auto& s : a.position_sets) {
        std::vector<double> x;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                x.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("--positions-set: cannot parse '" + s + "'");
            }
        }
        for (std::size_t i = 1; i < x.size(); ++i)
            if (!(x[i] > x[i - 1])) throw ConfigError("--positions-set must be increasing: " + s);
        if (x.empty()) throw ConfigError("--positions-set is empty");
        sets.push_back(std::move(x));
    }
    std::string csv;
    json scen = json::array();
    std::vector<std::string> failed;
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const auto res =
            run_homogenization_sweep(l, p, c.cfg.evolution.epsilons, scenario(c, l, sets[k]), c.jobs);
        auto part = convergence_csv(c, res.report, std::to_string(k));
        if (k > 0) part = part.substr(part.find('\n', part.find('\n') + 1) + 1);
        csv += part;
        auto f = check_convergence(c, res.report);
        for (auto& m : f) failed.push_back("scenario " + std::to_string(k) + ": " + m);
        scen.push_back({{"positions", sets[k]}, {"report", convergence_json(res.report)}});
    }
    write_atomic(output_path(c, a.out + ".csv"), csv);
    json r;
    r["command"] = "sweep";
    r["config_hash"] = config_hash(c.cfg);
    r["scenarios"] = scen;
    r["predicates_failed"] = failed;
    emit(c, a.out + ".json", r);
    if (!failed.empty()) throw AcceptanceError(failed.front());
    return 0;
}

// ---- supersol --------------------------------------------------------------------------

struct SupersolArgs {
    std::string layer;
    std::string corrector;
    bool fields = false;
    std::string out = "supersol";
};

int cmd_supersol(const Common& c, const SupersolArgs& a)
{
    const auto p = c.cfg.potential.build();
    const auto& h = c.cfg.harness;
    LayerProfile l;
    if (!a.layer.empty()) {
        l = load_layer_profile(a.layer);
    } else {
        LayerOptions o = c.cfg.layer;
        o.half_width = h.layer_half_width;
        o.dx = h.layer_dx;
        l = solve_layer(p, c.cfg.op.s, o);
    }
    const auto psi =
        a.corrector.empty() ? solve_corrector(l, p, c.cfg.corrector) : load_corrector_profile(a.corrector);
    const auto sigma = stress(c, h.positions.front() - 1000.0, h.positions.back() + 1000.0,
                              std::max(h.time, 1.0));

    // Shifted system at the evaluation time for a given delta.
    auto state_for = [&](double d) {
        ParticleState st;
        st.positions = h.positions;
        st.s = l.s;
        st.gamma = mobility(c, &l);
        st.delta = d;
        if (h.time > 0.0)
            return integrate(st, sigma, h.time, {h.time}, c.cfg.particles.integrate).samples[0];
        for (double& x : st.positions) x -= d;
        st.shifted = true;
        return st;
    };
    const auto st = state_for(h.delta);
    const double level = h.positivity_fraction * h.delta;
    const auto sw = run_positivity_sweep(l, psi, p, sigma, st, h.epsilons, h.margin, h.dx_factor,
                                         level, c.jobs, a.fields);
    const auto doubled = state_for(2.0 * h.delta);
    const auto sw2 = run_positivity_sweep(l, psi, p, sigma, doubled, h.epsilons, h.margin,
                                          h.dx_factor, 2.0 * level, c.jobs, false);

    const std::string hash = config_hash(c.cfg);
    std::string csv = csv_comment(hash);
    csv += "epsilon,grid_min_I,x_at_min,min_I_core,min_I_far,mean_I_far,grid_min_I_2delta\n";
    json rows = json::array();
    for (std::size_t k = 0; k < sw.epsilons.size(); ++k) {
        const auto& r = sw.reports[k];
        csv += format_double(sw.epsilons[k]) + "," + format_double(r.grid_min_I) + "," +
               format_double(r.x_at_min) + "," + format_double(r.error_terms.at("min_I_core")) +
               "," + format_double(r.error_terms.at("min_I_far")) + "," +
               format_double(r.error_terms.at("mean_I_far")) + "," +
               format_double(sw2.grid_min_I[k]) + "\n";
        json terms;
        for (const auto& [key, v] : r.error_terms) terms[key] = to_json_number(v);
        rows.push_back({{"epsilon", sw.epsilons[k]},
                        {"grid_min_I", r.grid_min_I},
                        {"x_at_min", r.x_at_min},
                        {"grid_min_I_2delta", sw2.grid_min_I[k]},
                        {"error_terms", terms}});
        if (a.fields) {
            std::string f = csv_comment(hash) + "x,I\n";
            const auto& g = r.I_field.grid;
            for (std::size_t i = 0; i < r.I_field.size(); ++i)
                f += format_double(g.x(static_cast<std::ptrdiff_t>(i))) + "," +
                     format_double(r.I_field.values[i]) + "\n";
            write_atomic(output_path(c, a.out + "_field_" + std::to_string(k) + ".csv"), f);
        }
    }
    write_atomic(output_path(c, a.out + ".csv"), csv);

    bool doubling_ok = true;
    for (std::size_t k = 0; k < sw.epsilons.size(); ++k)
        if (std::isfinite(sw.epsilon_star) && sw.epsilons[k] <= sw.epsilon_star &&
            !(sw2.grid_min_I[k] > sw.grid_min_I[k]))
            doubling_ok = false;
    json r;
    r["command"] = "supersol";
    r["config_hash"] = hash;
    r["delta"] = h.delta;
    r["time"] = h.time;
    r["positions"] = h.positions;
    r["shifted_positions"] = st.positions;
    r["level"] = level;
    r["epsilon_star"] = to_json_number(sw.epsilon_star);
    r["delta_doubling_increases_min_below_epsilon_star"] = doubling_ok;
    r["layer_half_width"] = l.u.grid.x_max();
    r["sweep"] = rows;
    std::vector<std::string> failed;
    if (h.require_positivity) {
        if (!std::isfinite(sw.epsilon_star))
            failed.push_back("grid_min_I < level at every epsilon of the ladder");
        else if (!doubling_ok)
            failed.push_back("doubling delta did not raise grid_min_I below epsilon*");
    }
    r["predicates_failed"] = failed;
    emit(c, a.out + ".json", r);
    if (!failed.empty()) throw AcceptanceError(failed.front());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"pnlab: fractional Peierls-Nabarro layers, particles and homogenization checks"};
    app.set_version_flag("--version", PNLAB_VERSION);
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("-c,--config", common.config_path, "JSON config file");
    app.add_option("--out-dir", common.out_dir,
                   "Directory for relative output paths (default: $PNLAB_OUTPUT_DIR or .)");
    app.add_option("-j,--jobs", common.jobs, "Concurrent epsilon jobs")->check(CLI::Range(1, 256));

    // Overrides shared by several subcommands; applied after the config is read.
    std::optional<double> s, half_width, dx, gamma, delta, t_end, rtol, epsilon, collar,
        max_final_error, time, margin;
    std::optional<int> samples;
    std::optional<std::string> sigma, scheme;
    std::vector<double> positions, epsilons;
    bool require_monotone = false, require_positivity = false;

    auto add_s = [&](CLI::App* sub) { sub->add_option("--s", s, "Fractional order in (0, 1/2)"); };
    auto add_positions = [&](CLI::App* sub) {
        sub->add_option("--positions", positions, "Initial positions x1,x2,...")->delimiter(',');
    };
    auto add_sigma = [&](CLI::App* sub) {
        sub->add_option("--sigma", sigma, "Stress: zero | const:c | smooth:A,B,k,w | table:path");
    };

    LayerArgs la;
    auto* layer = app.add_subcommand("layer", "Solve the layer profile and fit its far field");
    add_s(layer);
    layer->add_option("--half-width", half_width, "Half window");
    layer->add_option("--dx", dx, "Grid step");
    layer->add_option("--out", la.out, "Profile archive");
    layer->add_option("--decay-csv", la.decay_csv, "Far-field fit table");
    layer->add_option("--fit-min", la.fit_min, "Fit window start");
    layer->add_option("--fit-max", la.fit_max, "Fit window end");
    layer->add_option("--dump-weights", la.dump_weights,
                      "Write the operator row at the window centre to this CSV");

    CorrectorArgs ca;
    auto* corrector = app.add_subcommand("corrector", "Solve the linear corrector");
    add_s(corrector);
    corrector->add_option("--layer", ca.layer, "Layer profile archive (solved if absent)");
    corrector->add_option("--out", ca.out, "Profile archive");

    ParticlesArgs pa;
    auto* particles = app.add_subcommand("particles", "Integrate the particle ODE");
    add_s(particles);
    particles->add_option("--layer", pa.layer, "Layer profile archive (for gamma and s)");
    particles->add_option("--gamma", gamma, "Mobility (overrides the layer)");
    add_positions(particles);
    add_sigma(particles);
    particles->add_option("--delta", delta, "Shift parameter (>= 0)");
    particles->add_option("--t-end", t_end, "Final time");
    particles->add_option("--rtol", rtol, "Relative tolerance");
    particles->add_option("--samples", samples, "Number of equally spaced samples");
    particles->add_option("--out", pa.out, "Trajectory CSV");

    EvolveArgs ea;
    auto* evolve = app.add_subcommand("evolve", "Evolve the rescaled field");
    add_s(evolve);
    evolve->add_option("--layer", ea.layer, "Layer profile archive (solved if absent)");
    evolve->add_option("--epsilon", epsilon, "Scale parameter");
    add_positions(evolve);
    add_sigma(evolve);
    evolve->add_option("--t-end", t_end, "Final time");
    evolve->add_option("--samples", samples, "Number of equally spaced samples");
    evolve->add_option("--scheme", scheme, "explicit | imex-reaction");
    evolve->add_option("--out", ea.out, "Output prefix");

    CompareArgs cma;
    auto* compare = app.add_subcommand("compare", "Evolution against particles over an epsilon list");
    add_s(compare);
    compare->add_option("--layer", cma.layer, "Layer profile archive (solved if absent)");
    compare->add_option("--epsilons", epsilons, "Epsilon list")->delimiter(',');
    add_positions(compare);
    add_sigma(compare);
    compare->add_option("--t-end", t_end, "Final time");
    compare->add_option("--samples", samples, "Number of equally spaced samples");
    compare->add_option("--scheme", scheme, "explicit | imex-reaction");
    compare->add_option("--margin", margin, "Window margin beyond the initial positions");
    compare->add_option("--collar", collar, "L1 collar half width");
    compare->add_flag("--require-monotone", require_monotone, "Exit 4 unless errors decrease");
    compare->add_option("--max-final-error", max_final_error,
                        "Exit 4 if the final error at the smallest epsilon exceeds this");
    compare->add_option("--out", cma.out, "Output prefix");

    SweepArgs swa;
    auto* sweep = app.add_subcommand("sweep", "compare over several position sets");
    add_s(sweep);
    sweep->add_option("--layer", swa.layer, "Layer profile archive (solved if absent)");
    sweep->add_option("--epsilons", epsilons, "Epsilon list")->delimiter(',');
    sweep->add_option("--positions-set", swa.position_sets, "Position set \"x1,x2,...\" (repeat)");
    add_sigma(sweep);
    sweep->add_option("--t-end", t_end, "Final time");
    sweep->add_option("--samples", samples, "Number of equally spaced samples");
    sweep->add_option("--margin", margin, "Window margin beyond the initial positions");
    sweep->add_flag("--require-monotone", require_monotone, "Exit 4 unless errors decrease");
    sweep->add_option("--max-final-error", max_final_error,
                      "Exit 4 if the final error at the smallest epsilon exceeds this");
    sweep->add_option("--out", swa.out, "Output prefix");

    SupersolArgs sa;
    auto* supersol = app.add_subcommand("supersol", "Supersolution discrepancy over an epsilon ladder");
    add_s(supersol);
    supersol->add_option("--layer", sa.layer, "Layer profile archive (solved if absent)");
    supersol->add_option("--corrector", sa.corrector, "Corrector archive (solved if absent)");
    supersol->add_option("--delta", delta, "Shift parameter (> 0)");
    supersol->add_option("--epsilons", epsilons, "Epsilon ladder")->delimiter(',');
    add_positions(supersol);
    supersol->add_option("--time", time, "Evaluation time of the shifted system");
    supersol->add_option("--margin", margin, "Window margin beyond the outer layers");
    supersol->add_flag("--require-positivity", require_positivity,
                       "Exit 4 unless some epsilon* exists and doubling delta raises the minimum");
    supersol->add_flag("--fields", sa.fields, "Write I on the grid for every epsilon");
    supersol->add_option("--out", sa.out, "Output prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!common.config_path.empty()) common.cfg = parse_config(common.config_path);
        // Flags override config keys; the merged config is revalidated (and hashed) as a whole.
        auto& cfg = common.cfg;
        if (s) cfg.op.s = *s;
        if (half_width) cfg.layer.half_width = *half_width;
        if (dx) cfg.layer.dx = *dx;
        if (gamma) cfg.particles.gamma = *gamma;
        if (sigma) cfg.particles.sigma = *sigma;
        if (rtol) cfg.particles.integrate.rtol = *rtol;
        if (epsilon) cfg.evolution.epsilon = *epsilon;
        if (scheme) cfg.evolution.stepper.scheme = scheme_from_string(*scheme);
        if (collar) cfg.harness.collar = *collar;
        if (max_final_error) cfg.harness.max_final_error = *max_final_error;
        if (require_monotone) cfg.harness.require_monotone = true;
        if (require_positivity) cfg.harness.require_positivity = true;
        if (time) cfg.harness.time = *time;
        if (supersol->parsed()) {
            if (delta) cfg.harness.delta = *delta;
            if (!positions.empty()) cfg.harness.positions = positions;
            if (!epsilons.empty()) cfg.harness.epsilons = epsilons;
            if (margin) cfg.harness.margin = *margin;
        } else {
            if (delta) cfg.particles.delta = *delta;
            if (!positions.empty()) cfg.particles.positions = positions;
            if (!epsilons.empty()) cfg.evolution.epsilons = epsilons;
            if (margin) cfg.evolution.stepper.margin = *margin;
        }
        if (t_end) {
            cfg.particles.t_end = *t_end;
            cfg.evolution.t_end = *t_end;
        }
        if (samples) {
            cfg.particles.samples = *samples;
            cfg.evolution.samples = *samples;
        }
        cfg = config_from_string(config_to_json(cfg));

        if (layer->parsed()) cmd_layer(common, la);
        if (corrector->parsed()) cmd_corrector(common, ca);
        if (particles->parsed()) cmd_particles(common, pa);
        if (evolve->parsed()) cmd_evolve(common, ea);
        if (compare->parsed()) return cmd_compare(common, cma);
        if (sweep->parsed()) return cmd_sweep(common, swa);
        if (supersol->parsed()) return cmd_supersol(common, sa);
        return 0;
    } catch (const AcceptanceError& e) {
        std::cerr << "acceptance predicate failed: " << e.what() << "\n";
        return 4;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << " (last residual " << e.last_residual()
                  << ")\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const VersionError& e) {
        std::cerr << "version error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
