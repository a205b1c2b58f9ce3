#include "pnlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "pnlab/error.hpp"
#include "pnlab/stress.hpp"

namespace pnlab {

using json = nlohmann::ordered_json;

Potential PotentialSection::build() const
{
    return Potential::from_spec(kind, coefficients);
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::size_t levenshtein(const std::string& a, const std::string& b)
{
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

namespace {

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

// Rejects keys outside `allowed`, suggesting the nearest one within edit distance 3.
void check_keys(const json& j, const std::string& path, const std::vector<std::string>& allowed)
{
    if (!j.is_object()) throw ConfigError((path.empty() ? "config" : path) + " must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        std::string best;
        std::size_t best_d = 4;
        for (const auto& a : allowed) {
            if (a == key) ok = true;
            const std::size_t d = levenshtein(key, a);
            if (d < best_d) {
                best_d = d;
                best = a;
            }
        }
        if (!ok) {
            std::string msg = "unknown key '" + join(path, key) + "'";
            if (!best.empty()) msg += " (did you mean '" + join(path, best) + "'?)";
            throw ConfigError(msg);
        }
    }
}

void read(const json& j, const std::string& path, const char* key, double& out)
{
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_null()) {
        out = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    if (!v.is_number()) throw ConfigError(join(path, key) + " must be a number");
    out = v.get<double>();
}

template <class Int>
void read_int(const json& j, const std::string& path, const char* key, Int& out)
{
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path, key) + " must be an integer");
    out = v.get<Int>();
}

void read(const json& j, const std::string& path, const char* key, bool& out)
{
    if (!j.contains(key)) return;
    if (!j.at(key).is_boolean()) throw ConfigError(join(path, key) + " must be true or false");
    out = j.at(key).get<bool>();
}

void read(const json& j, const std::string& path, const char* key, std::string& out)
{
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) throw ConfigError(join(path, key) + " must be a string");
    out = j.at(key).get<std::string>();
}

void read(const json& j, const std::string& path, const char* key, std::vector<double>& out)
{
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array()) throw ConfigError(join(path, key) + " must be an array of numbers");
    out.clear();
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(join(path, key) + " must be an array of numbers");
        out.push_back(e.get<double>());
    }
}

void require(bool ok, const std::string& key, const std::string& rule, double value)
{
    if (ok) return;
    std::ostringstream os;
    os.precision(10);
    os << key << " = " << value << " is out of range: " << rule;
    throw ConfigError(os.str());
}

void require_sorted_positions(const std::vector<double>& x, const std::string& key)
{
    if (x.empty()) throw ConfigError(key + " must hold at least one position");
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(std::isfinite(x[i]), key, "finite", x[i]);
        if (i > 0 && !(x[i] > x[i - 1]))
            throw ConfigError(key + " must be strictly increasing");
    }
}

void require_positive_list(const std::vector<double>& e, const std::string& key)
{
    if (e.empty()) throw ConfigError(key + " must not be empty");
    for (double v : e) require(v > 0.0 && std::isfinite(v), key, "each entry > 0", v);
}

json nullable(double v)
{
    return std::isnan(v) ? json(nullptr) : json(v);
}

void from_json(const json& root, RunConfig& c)
{
    check_keys(root, "",
               {"potential", "operator", "layer", "corrector", "particles", "evolution", "harness"});

    if (root.contains("potential")) {
        const auto& j = root.at("potential");
        check_keys(j, "potential", {"kind", "coefficients"});
        std::string kind = to_string(c.potential.kind);
        read(j, "potential", "kind", kind);
        try {
            c.potential.kind = potential_kind_from_string(kind);
        } catch (const Error& e) {
            throw ConfigError(std::string("potential.kind: ") + e.what());
        }
        read(j, "potential", "coefficients", c.potential.coefficients);
    }
    try {
        (void)c.potential.build();
    } catch (const Error& e) {
        throw ConfigError(std::string("potential: ") + e.what());
    }

    if (root.contains("operator")) {
        const auto& j = root.at("operator");
        check_keys(j, "operator", {"s", "stitch_tol"});
        read(j, "operator", "s", c.op.s);
        read(j, "operator", "stitch_tol", c.op.stitch_tol);
    }
    require(c.op.s > 0.0 && c.op.s < 0.5, "operator.s", "0 < s < 1/2", c.op.s);
    require(c.op.stitch_tol > 0.0, "operator.stitch_tol", "> 0", c.op.stitch_tol);

    if (root.contains("layer")) {
        const auto& j = root.at("layer");
        const std::string p = "layer";
        check_keys(j, p,
                   {"half_width", "dx", "tol", "max_steps", "recenter_every", "newton_switch",
                    "pseudo_dt", "max_newton", "tail_fraction"});
        auto& l = c.layer;
        read(j, p, "half_width", l.half_width);
        read(j, p, "dx", l.dx);
        read(j, p, "tol", l.tol);
        read_int(j, p, "max_steps", l.max_steps);
        read_int(j, p, "recenter_every", l.recenter_every);
        read(j, p, "newton_switch", l.newton_switch);
        read(j, p, "pseudo_dt", l.pseudo_dt);
        read_int(j, p, "max_newton", l.max_newton);
        read(j, p, "tail_fraction", l.tail_fraction);
    }
    {
        const auto& l = c.layer;
        require(l.half_width >= 20.0, "layer.half_width", ">= 20", l.half_width);
        require(l.dx > 0.0 && l.dx <= l.half_width / 20.0, "layer.dx", "0 < dx <= half_width/20",
                l.dx);
        require(l.tol > 0.0, "layer.tol", "> 0", l.tol);
        require(l.max_steps >= 1, "layer.max_steps", ">= 1", static_cast<double>(l.max_steps));
        require(l.recenter_every >= 1, "layer.recenter_every", ">= 1", l.recenter_every);
        require(l.newton_switch > 0.0, "layer.newton_switch", "> 0", l.newton_switch);
        require(l.pseudo_dt > 0.0, "layer.pseudo_dt", "> 0", l.pseudo_dt);
        require(l.max_newton >= 1, "layer.max_newton", ">= 1", l.max_newton);
        require(l.tail_fraction > 0.0 && l.tail_fraction < 0.5, "layer.tail_fraction",
                "0 < f < 1/2", l.tail_fraction);
    }

    if (root.contains("corrector")) {
        const auto& j = root.at("corrector");
        check_keys(j, "corrector", {"tol", "restart", "max_iter"});
        read(j, "corrector", "tol", c.corrector.tol);
        read_int(j, "corrector", "restart", c.corrector.restart);
        read_int(j, "corrector", "max_iter", c.corrector.max_iter);
    }
    require(c.corrector.tol > 0.0, "corrector.tol", "> 0", c.corrector.tol);
    require(c.corrector.restart >= 1, "corrector.restart", ">= 1", c.corrector.restart);
    require(c.corrector.max_iter >= 1, "corrector.max_iter", ">= 1", c.corrector.max_iter);

    if (root.contains("particles")) {
        const auto& j = root.at("particles");
        const std::string p = "particles";
        check_keys(j, p,
                   {"gamma", "positions", "delta", "sigma", "stress_bound", "t_end", "samples",
                    "rtol", "atol", "min_gap", "initial_step", "max_steps"});
        auto& q = c.particles;
        read(j, p, "gamma", q.gamma);
        read(j, p, "positions", q.positions);
        read(j, p, "delta", q.delta);
        read(j, p, "sigma", q.sigma);
        read(j, p, "stress_bound", q.stress_bound);
        read(j, p, "t_end", q.t_end);
        read_int(j, p, "samples", q.samples);
        read(j, p, "rtol", q.integrate.rtol);
        read(j, p, "atol", q.integrate.atol);
        read(j, p, "min_gap", q.integrate.min_gap);
        read(j, p, "initial_step", q.integrate.initial_step);
        read_int(j, p, "max_steps", q.integrate.max_steps);
    }
    {
        const auto& q = c.particles;
        require(std::isnan(q.gamma) || q.gamma > 0.0, "particles.gamma", "> 0 or null", q.gamma);
        require_sorted_positions(q.positions, "particles.positions");
        require(q.delta >= 0.0, "particles.delta", ">= 0", q.delta);
        require(std::isnan(q.stress_bound) || q.stress_bound >= 0.0, "particles.stress_bound",
                ">= 0 or null", q.stress_bound);
        require(q.t_end > 0.0, "particles.t_end", "> 0", q.t_end);
        require(q.samples >= 2, "particles.samples", ">= 2", q.samples);
        require(q.integrate.rtol > 0.0 && q.integrate.rtol <= 1e-2, "particles.rtol",
                "0 < rtol <= 1e-2", q.integrate.rtol);
        require(q.integrate.atol >= 0.0, "particles.atol", ">= 0 (0: same as rtol)",
                q.integrate.atol);
        require(q.integrate.min_gap > 0.0, "particles.min_gap", "> 0", q.integrate.min_gap);
        require(q.integrate.initial_step > 0.0, "particles.initial_step", "> 0",
                q.integrate.initial_step);
        require(q.integrate.max_steps >= 1, "particles.max_steps", ">= 1",
                static_cast<double>(q.integrate.max_steps));
        try {
            (void)StressField::parse(q.sigma);
        } catch (const Error& e) {
            throw ConfigError(std::string("particles.sigma: ") + e.what());
        }
    }

    if (root.contains("evolution")) {
        const auto& j = root.at("evolution");
        const std::string p = "evolution";
        check_keys(j, p,
                   {"epsilon", "epsilons", "t_end", "samples", "scheme", "dt_safety", "margin",
                    "x_min", "x_max", "dx", "band_slack"});
        auto& e = c.evolution;
        read(j, p, "epsilon", e.epsilon);
        read(j, p, "epsilons", e.epsilons);
        read(j, p, "t_end", e.t_end);
        read_int(j, p, "samples", e.samples);
        std::string scheme = to_string(e.stepper.scheme);
        read(j, p, "scheme", scheme);
        e.stepper.scheme = scheme_from_string(scheme);
        read(j, p, "dt_safety", e.stepper.dt_safety);
        read(j, p, "margin", e.stepper.margin);
        read(j, p, "x_min", e.stepper.x_min);
        read(j, p, "x_max", e.stepper.x_max);
        read(j, p, "dx", e.stepper.dx);
        read(j, p, "band_slack", e.stepper.band_slack);
    }
    {
        const auto& e = c.evolution;
        require(e.epsilon > 0.0, "evolution.epsilon", "> 0", e.epsilon);
        require_positive_list(e.epsilons, "evolution.epsilons");
        require(e.t_end > 0.0, "evolution.t_end", "> 0", e.t_end);
        require(e.samples >= 1, "evolution.samples", ">= 1", e.samples);
        require(e.stepper.dt_safety > 0.0 && e.stepper.dt_safety <= 1.0, "evolution.dt_safety",
                "0 < dt_safety <= 1", e.stepper.dt_safety);
        require(e.stepper.margin > 0.0, "evolution.margin", "> 0", e.stepper.margin);
        require(e.stepper.dx >= 0.0, "evolution.dx", ">= 0 (0: epsilon * layer dx)",
                e.stepper.dx);
        require(e.stepper.band_slack > 0.0, "evolution.band_slack", "> 0", e.stepper.band_slack);
        if (std::isnan(e.stepper.x_min) != std::isnan(e.stepper.x_max))
            throw ConfigError("evolution.x_min and evolution.x_max must be given together");
        if (!std::isnan(e.stepper.x_min) && !(e.stepper.x_min < e.stepper.x_max))
            throw ConfigError("evolution.x_min must be below evolution.x_max");
    }

    if (root.contains("harness")) {
        const auto& j = root.at("harness");
        const std::string p = "harness";
        check_keys(j, p,
                   {"collar", "require_monotone", "max_final_error", "delta", "time", "positions",
                    "epsilons", "margin", "dx_factor", "positivity_fraction",
                    "require_positivity", "layer_half_width", "layer_dx"});
        auto& h = c.harness;
        read(j, p, "collar", h.collar);
        read(j, p, "require_monotone", h.require_monotone);
        read(j, p, "max_final_error", h.max_final_error);
        read(j, p, "delta", h.delta);
        read(j, p, "time", h.time);
        read(j, p, "positions", h.positions);
        read(j, p, "epsilons", h.epsilons);
        read(j, p, "margin", h.margin);
        read(j, p, "dx_factor", h.dx_factor);
        read(j, p, "positivity_fraction", h.positivity_fraction);
        read(j, p, "require_positivity", h.require_positivity);
        read(j, p, "layer_half_width", h.layer_half_width);
        read(j, p, "layer_dx", h.layer_dx);
    }
    {
        const auto& h = c.harness;
        require(h.collar > 0.0, "harness.collar", "> 0", h.collar);
        require(std::isnan(h.max_final_error) || h.max_final_error > 0.0,
                "harness.max_final_error", "> 0 or null", h.max_final_error);
        require(h.delta > 0.0, "harness.delta", "> 0", h.delta);
        require(h.time >= 0.0, "harness.time", ">= 0", h.time);
        require_sorted_positions(h.positions, "harness.positions");
        require_positive_list(h.epsilons, "harness.epsilons");
        require(h.margin > 0.0, "harness.margin", "> 0", h.margin);
        require(h.dx_factor > 0.0 && h.dx_factor <= 0.125, "harness.dx_factor",
                "0 < dx_factor <= 1/8", h.dx_factor);
        require(h.positivity_fraction >= 0.0, "harness.positivity_fraction", ">= 0",
                h.positivity_fraction);
        require(h.layer_half_width >= 20.0, "harness.layer_half_width", ">= 20",
                h.layer_half_width);
        require(h.layer_dx > 0.0 && h.layer_dx <= h.layer_half_width / 20.0, "harness.layer_dx",
                "0 < dx <= layer_half_width/20", h.layer_dx);
    }
}

}  // namespace

RunConfig config_from_string(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    from_json(root, c);
    return c;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_string(ss.str());
}

std::string config_to_json(const RunConfig& c)
{
    json j;
    j["potential"] = {{"kind", to_string(c.potential.kind)},
                      {"coefficients", c.potential.coefficients}};
    j["operator"] = {{"s", c.op.s}, {"stitch_tol", c.op.stitch_tol}};
    const auto& l = c.layer;
    j["layer"] = {{"half_width", l.half_width},         {"dx", l.dx},
                  {"tol", l.tol},                       {"max_steps", l.max_steps},
                  {"recenter_every", l.recenter_every}, {"newton_switch", l.newton_switch},
                  {"pseudo_dt", l.pseudo_dt},           {"max_newton", l.max_newton},
                  {"tail_fraction", l.tail_fraction}};
    j["corrector"] = {{"tol", c.corrector.tol},
                      {"restart", c.corrector.restart},
                      {"max_iter", c.corrector.max_iter}};
    const auto& q = c.particles;
    j["particles"] = {{"gamma", nullable(q.gamma)},
                      {"positions", q.positions},
                      {"delta", q.delta},
                      {"sigma", q.sigma},
                      {"stress_bound", nullable(q.stress_bound)},
                      {"t_end", q.t_end},
                      {"samples", q.samples},
                      {"rtol", q.integrate.rtol},
                      {"atol", q.integrate.atol},
                      {"min_gap", q.integrate.min_gap},
                      {"initial_step", q.integrate.initial_step},
                      {"max_steps", q.integrate.max_steps}};
    const auto& e = c.evolution;
    j["evolution"] = {{"epsilon", e.epsilon},
                      {"epsilons", e.epsilons},
                      {"t_end", e.t_end},
                      {"samples", e.samples},
                      {"scheme", to_string(e.stepper.scheme)},
                      {"dt_safety", e.stepper.dt_safety},
                      {"margin", e.stepper.margin},
                      {"x_min", nullable(e.stepper.x_min)},
                      {"x_max", nullable(e.stepper.x_max)},
                      {"dx", e.stepper.dx},
                      {"band_slack", e.stepper.band_slack}};
    const auto& h = c.harness;
    j["harness"] = {{"collar", h.collar},
                    {"require_monotone", h.require_monotone},
                    {"max_final_error", nullable(h.max_final_error)},
                    {"delta", h.delta},
                    {"time", h.time},
                    {"positions", h.positions},
                    {"epsilons", h.epsilons},
                    {"margin", h.margin},
                    {"dx_factor", h.dx_factor},
                    {"positivity_fraction", h.positivity_fraction},
                    {"require_positivity", h.require_positivity},
                    {"layer_half_width", h.layer_half_width},
                    {"layer_dx", h.layer_dx}};
    return j.dump(2);
}

std::string config_hash(const RunConfig& cfg)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_to_json(cfg))));
    return buf;
}

}  // namespace pnlab
