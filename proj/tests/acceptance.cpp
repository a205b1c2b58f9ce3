// Acceptance run: one PASS/FAIL line per criterion, with the measured numbers.
//
// Exit status: 0 when every criterion passes or fails only in the documented way listed in
// kKnownFailures (see README, "Known limitations"); 1 on any other failure or on a crash.
// The PASS/FAIL lines themselves are never adjusted.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "pnlab/archive.hpp"
#include "pnlab/config.hpp"
#include "pnlab/error.hpp"
#include "pnlab/frac_operator.hpp"
#include "pnlab/harness.hpp"

using namespace pnlab;

namespace {

// Layer far-field fit on [50, 200] and the homogenization threshold at eps = 0.05.
const std::set<int> kKnownFailures = {2, 6};

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string g(double v)
{
    return fmt("%.4g", v);
}

const Potential& pot()
{
    static const Potential p = Potential::builtin_cosine();
    return p;
}

// Layer on [-400, 400] with dx = 0.05, shared by criteria 2, 4 and 8.
const LayerProfile& main_layer()
{
    static const LayerProfile l = solve_layer(pot(), 0.25, LayerOptions{});
    return l;
}

const CorrectorProfile& main_corrector()
{
    static const CorrectorProfile c = solve_corrector(main_layer(), pot());
    return c;
}

Outcome operator_spectral()
{
    double worst = 0.0, slowest = 0.0;
    for (double s : {0.1, 0.25, 0.4}) {
        for (double w : {0.5, 1.0, 2.0}) {
            const auto t0 = std::chrono::steady_clock::now();
            const double dx = 2.0 * std::numbers::pi / (64.0 * w);
            const auto grid = Grid::symmetric(64.0 * std::numbers::pi / w, dx);
            const FracOperator op(grid, s);
            std::vector<double> v(grid.size);
            for (std::size_t i = 0; i < grid.size; ++i)
                v[i] = std::cos(w * grid.x(static_cast<std::ptrdiff_t>(i)));
            const auto y = op.apply(GridFunction(grid, std::move(v)));
            const double m = oracle::multiplier_quadrature(s, w);
            for (std::size_t i = 3 * grid.size / 8; i < 5 * grid.size / 8; ++i) {
                const double x = grid.x(static_cast<std::ptrdiff_t>(i));
                worst = std::max(worst, std::abs(y[i] + m * std::cos(w * x)) / m);
            }
            slowest = std::max(slowest, seconds_since(t0));
        }
    }
    return {worst <= 1e-4 && slowest < 10.0,
            "max rel err " + g(worst) + " (<= 1e-4), slowest case " + fmt("%.2f", slowest) +
                " s (< 10 s)"};
}

Outcome layer_decay()
{
    const auto& l = main_layer();
    const auto d = verify_decay(l, 50.0, 200.0);
    // Corrected-slope margin, fixed from the reference solve on [-3200, 3200] at dx = 0.4.
    LayerOptions ro;
    ro.half_width = 3200.0;
    ro.dx = 0.4;
    const auto ref = solve_layer(pot(), 0.25, ro);
    const auto dr = verify_decay(ref, 50.0, 200.0);
    const double margin = 0.1;
    const double two_s = 0.5;
    const bool residual_ok = l.residual_norm <= 1e-6;
    const double slope_err =
        std::max(std::abs(d.left.slope + two_s), std::abs(d.right.slope + two_s));
    const double coef_err = std::max(std::abs(d.left.coefficient / 2.0 - 1.0),
                                     std::abs(d.right.coefficient / 2.0 - 1.0));
    const double corrected =
        std::max({d.left.corrected_slope, d.right.corrected_slope, dr.left.corrected_slope,
                  dr.right.corrected_slope});
    const bool slope_ok = slope_err <= 0.05;
    const bool coef_ok = coef_err <= 0.10;
    const bool corr_ok = corrected <= -two_s - margin;
    return {residual_ok && slope_ok && coef_ok && corr_ok,
            "residual " + g(l.residual_norm) + (residual_ok ? " ok" : " FAIL") + "; slope " +
                g(d.right.slope) + "/" + g(d.left.slope) + (slope_ok ? " ok" : " FAIL") +
                " (need -0.5 +- 0.05); coefficient " + g(d.right.coefficient) + "/" +
                g(d.left.coefficient) + (coef_ok ? " ok" : " FAIL") +
                " (need 2 +- 10%); corrected slope " + g(corrected) + (corr_ok ? " ok" : " FAIL") +
                " (need <= " + g(-two_s - margin) + ")"};
}

Outcome theta_values()
{
    bool ok = true;
    double worst = 0.0;
    for (double s : {0.01, 0.05, 0.1, 0.125, 0.15}) {
        const double e = std::abs(theta_exponent(s) - 4.0 * s);
        worst = std::max(worst, e);
        ok = ok && e == 0.0;
    }
    for (double s : {0.2, 0.25, 0.3, 0.4, 0.49}) {
        const double e = std::abs(theta_exponent(s) - (1.0 + 2.0 * s) / 2.0);
        worst = std::max(worst, e);
        ok = ok && e == 0.0;
    }
    const double at_sixth = theta_exponent(1.0 / 6.0);
    const double at_quarter = theta_exponent(0.25);
    // 1/6 is not representable, so allow the rounding of 4 * (1/6) against 2/3.
    const bool sixth_ok = std::abs(at_sixth - 2.0 / 3.0) <= 2.0 * 0x1p-52;
    const bool quarter_ok = at_quarter == 0.75;
    return {ok && sixth_ok && quarter_ok,
            "max deviation on samples " + g(worst) + ", theta(1/6) = " + fmt("%.17g", at_sixth) +
                ", theta(0.25) = " + fmt("%.17g", at_quarter)};
}

Outcome corrector_checks()
{
    const auto& l = main_layer();
    const auto& psi = main_corrector();
    std::vector<double> centres;
    for (double x = -200.0; x <= 200.0; x += 25.0) centres.push_back(x);
    const auto weak = weak_form_residual(l, psi, pot(), centres, 5.0);
    const double kernel = kernel_defect(l, pot(), 0.9);

    LayerOptions fine;
    fine.dx = 0.025;
    const auto lf = solve_layer(pot(), 0.25, fine);
    const auto pf = solve_corrector(lf, pot());
    auto max_abs = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };
    const double m1 = max_abs(psi.psi.values), m2 = max_abs(pf.psi.values);
    const double change = std::abs(m2 / m1 - 1.0);
    const bool ok = weak.max_relative <= 1e-5 && kernel <= 1e-4 && change < 0.02;
    return {ok, "weak form " + g(weak.max_relative) + " (<= 1e-5), kernel check on |x| <= 0.9X " +
                    g(kernel) + " (<= 1e-4), max|psi| " + g(m1) + " -> " + g(m2) +
                    " under dx halving, change " + g(change) + " (< 2%)"};
}

Outcome two_body()
{
    const double rtol = 1e-8;
    double worst = 0.0;
    std::vector<double> times;
    for (int k = 0; k <= 400; ++k) times.push_back(0.25 * k);
    for (double s : {0.1, 0.25, 0.4}) {
        for (double gamma : {1.0, main_layer().gamma}) {
            ParticleState st;
            st.positions = {-0.5, 0.5};
            st.s = s;
            st.gamma = gamma;
            IntegrateOptions o;
            o.rtol = rtol;
            const auto tr = integrate(st, StressField::zero(), 100.0, times, o);
            for (const auto& p : tr.samples) {
                const double gap = p.positions[1] - p.positions[0];
                const double ref = two_body_gap(1.0, s, gamma, p.time);
                worst = std::max(worst, std::abs(gap - ref) / ref);
            }
        }
    }
    return {worst <= 10.0 * rtol,
            "max rel gap error " + g(worst) + " (<= " + g(10.0 * rtol) +
                ") over t in [0, 100], gamma in {1, " + g(main_layer().gamma) + "}"};
}

Outcome homogenization()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto& l = main_layer();
    SweepScenario sc;
    sc.positions = {-5.0, 5.0};
    sc.gamma = l.gamma;
    sc.t_end = 1.0;
    sc.sample_times = {0.0, 0.25, 0.5, 0.75, 1.0};
    // The window reaches 50 beyond the particles' final span.
    ParticleState ps;
    ps.positions = sc.positions;
    ps.gamma = l.gamma;
    const auto end = integrate(ps, StressField::zero(), 1.0, {1.0}).samples[0].positions;
    sc.evolution.x_min = std::floor(end.front() - 50.0);
    sc.evolution.x_max = std::ceil(end.back() + 50.0);
    SweepResult res;
    try {
        res = run_homogenization_sweep(l, pot(), {0.2, 0.1, 0.05}, sc);
    } catch (const TopologyError& e) {
        return {false, std::string("crossing count changed: ") + e.what()};
    }
    const auto& r = res.report;
    const double final_err = r.crossing_errors[2].back();
    const bool ok = r.monotone_in_epsilon && final_err <= 0.05;
    std::string d = "final errors";
    for (std::size_t k = 0; k < 3; ++k)
        d += " " + g(r.crossing_errors[k].back()) + " (eps " + g(r.epsilons[k]) + ")";
    d += r.monotone_in_epsilon ? "; strictly decreasing" : "; NOT strictly decreasing";
    d += "; at eps 0.05 " + g(final_err) + (final_err <= 0.05 ? " <= 0.05" : " > 0.05");
    d += "; crossing counts conserved; t=0 errors";
    for (std::size_t k = 0; k < 3; ++k) d += " " + g(r.crossing_errors[k].front());
    d += "; " + fmt("%.0f", seconds_since(t0)) + " s";
    return {ok, d};
}

Outcome supersolution()
{
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig defaults;
    const auto& h = defaults.harness;
    LayerOptions lo;
    lo.half_width = h.layer_half_width;
    lo.dx = h.layer_dx;
    const auto l = solve_layer(pot(), 0.25, lo);
    const auto psi = solve_corrector(l, pot());
    auto state = [&](double delta) {
        ParticleState st;
        st.gamma = l.gamma;
        st.delta = delta;
        st.shifted = true;
        for (double x : h.positions) st.positions.push_back(x - delta);
        return st;
    };
    const double delta = h.delta;
    const double level = h.positivity_fraction * delta;
    const auto a = run_positivity_sweep(l, psi, pot(), StressField::zero(), state(delta),
                                        h.epsilons, h.margin, h.dx_factor, level);
    const auto b = run_positivity_sweep(l, psi, pot(), StressField::zero(), state(2.0 * delta),
                                        h.epsilons, h.margin, h.dx_factor, 2.0 * level);
    std::string d = "grid_min_I";
    for (std::size_t k = 0; k < a.epsilons.size(); ++k)
        d += " " + g(a.grid_min_I[k]) + "@" + g(a.epsilons[k]);
    const bool found = std::isfinite(a.epsilon_star);
    bool doubling = found;
    std::string dd;
    for (std::size_t k = 0; k < a.epsilons.size(); ++k) {
        if (!found || a.epsilons[k] > a.epsilon_star) continue;
        dd += " " + g(a.grid_min_I[k]) + " -> " + g(b.grid_min_I[k]) + "@" + g(a.epsilons[k]);
        if (!(b.grid_min_I[k] > a.grid_min_I[k])) doubling = false;
    }
    d += "; level delta/4 = " + g(level) + "; eps* = " + (found ? g(a.epsilon_star) : "none");
    d += "; doubling delta below eps*:" + (dd.empty() ? std::string(" n/a") : dd);
    d += "; " + fmt("%.0f", seconds_since(t0)) + " s";
    return {found && doubling, d};
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism()
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("pnlab_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::vector<std::string> problems;

    // Profiles: save -> load is bit-exact, and saving the loaded profile gives the same bytes.
    const auto& l = main_layer();
    const auto& psi = main_corrector();
    const auto lp = (dir / "layer.csv").string(), cp = (dir / "psi.csv").string();
    save_profile(l, lp);
    save_profile(psi, cp);
    const auto l2 = load_layer_profile(lp);
    const auto c2 = load_corrector_profile(cp);
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * 8) == 0;
    };
    if (!same(l.u.values, l2.u.values) || !same(l.du.values, l2.du.values) ||
        !(l.u.tail == l2.u.tail) || !(l.du.tail == l2.du.tail) || l.gamma != l2.gamma)
        problems.push_back("layer round-trip");
    if (!same(psi.psi.values, c2.psi.values) || !(psi.psi.tail == c2.psi.tail))
        problems.push_back("corrector round-trip");
    save_profile(l2, (dir / "layer2.csv").string());
    if (slurp(lp) != slurp((dir / "layer2.csv").string())) problems.push_back("layer re-save bytes");

    // Library reruns: evolution + comparison and a supersolution evaluation, twice each.
    auto run_once = [&] {
        SweepScenario sc;
        sc.positions = {-3.0, 3.0};
        sc.gamma = l.gamma;
        sc.t_end = 0.05;
        sc.sample_times = {0.0, 0.05};
        sc.evolution.margin = 15.0;
        const auto r = run_homogenization_sweep(l, pot(), {0.2}, sc);
        ParticleState st;
        st.positions = {-20.1, 19.9};
        st.gamma = l.gamma;
        st.delta = 0.1;
        st.shifted = true;
        const auto s = supersolution_discrepancy(l, &psi, pot(), StressField::zero(), st, 0.1);
        return std::make_pair(r.runs[0].back().field.values, s.I_field.values);
    };
    const auto first = run_once(), second = run_once();
    if (!same(first.first, second.first)) problems.push_back("evolution rerun");
    if (!same(first.second, second.second)) problems.push_back("supersolution rerun");

    // CLI reruns into two directories, compared file by file.
    const std::string cli = PNLAB_CLI_PATH;
    auto cli_run = [&](const fs::path& out) {
        fs::create_directories(out);
        const std::string base = "\"" + cli + "\" --out-dir \"" + out.string() + "\" ";
        const std::string quiet = " > /dev/null 2>&1";
        int rc = std::system((base + "particles --gamma 2 --positions -1,0.5,2 --t-end 5" + quiet).c_str());
        rc |= std::system((base + "compare --layer \"" + lp +
                           "\" --epsilons 0.2 --positions -3,3 --t-end 0.02 --samples 2 --margin 15" +
                           quiet).c_str());
        return rc;
    };
    if (cli_run(dir / "a") != 0 || cli_run(dir / "b") != 0) {
        problems.push_back("CLI run failed");
    } else {
        std::size_t files = 0;
        for (const auto& e : fs::directory_iterator(dir / "a")) {
            ++files;
            const auto other = dir / "b" / e.path().filename();
            if (!fs::exists(other) || slurp(e.path().string()) != slurp(other.string()))
                problems.push_back("CLI output " + e.path().filename().string());
        }
        if (files < 4) problems.push_back("CLI wrote only " + std::to_string(files) + " files");
    }
    fs::remove_all(dir);
    std::string d = problems.empty() ? "profiles bit-exact; library and CLI reruns byte-identical"
                                     : "mismatch:";
    for (const auto& p : problems) d += " " + p + ";";
    return {problems.empty(), d};
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "operator spectral check", operator_spectral},
        {2, "layer residual and decay", layer_decay},
        {3, "exponent formula", theta_values},
        {4, "corrector", corrector_checks},
        {5, "two-body law", two_body},
        {6, "homogenization sweep", homogenization},
        {7, "supersolution positivity", supersolution},
        {8, "determinism and round-trip", determinism},
    };
    std::set<int> failed;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.pass) failed.insert(c.id);
        std::printf("[%d] %s %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::set<int> unexpected;
    for (int id : failed)
        if (!kKnownFailures.count(id)) unexpected.insert(id);
    std::printf("%zu of %zu criteria pass", criteria.size() - failed.size(), criteria.size());
    if (!failed.empty()) {
        std::printf("; failing:");
        for (int id : failed) std::printf(" %d%s", id, kKnownFailures.count(id) ? " (known)" : "");
    }
    std::printf("\n");
    return unexpected.empty() ? 0 : 1;
}
