#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pnlab/corrector_solver.hpp"
#include "pnlab/evolution.hpp"
#include "pnlab/layer_solver.hpp"
#include "pnlab/particle_dynamics.hpp"
#include "pnlab/potential.hpp"

namespace pnlab {

struct PotentialSection {
    PotentialKind kind = PotentialKind::builtin_cosine;
    std::vector<double> coefficients;  // user_cosine_series only
    Potential build() const;
};

struct OperatorSection {
    double s = 0.25;
    double stitch_tol = 1e-3;  // relative mismatch allowed between tail and edge value
};

struct ParticlesSection {
    double gamma = std::numeric_limits<double>::quiet_NaN();  // NaN: taken from the layer
    std::vector<double> positions{-5.0, 5.0};
    double delta = 0.0;
    std::string sigma = "zero";
    double stress_bound = std::numeric_limits<double>::quiet_NaN();  // M; NaN skips the check
    double t_end = 1.0;
    int samples = 11;
    IntegrateOptions integrate;
};

struct EvolutionSection {
    EvolutionConfig stepper;
    double epsilon = 0.1;
    std::vector<double> epsilons{0.2, 0.1, 0.05};
    double t_end = 1.0;
    int samples = 5;
};

struct HarnessSection {
    double collar = 0.5;
    bool require_monotone = false;
    double max_final_error = std::numeric_limits<double>::quiet_NaN();  // NaN: no predicate
    double delta = 0.1;
    double time = 0.0;
    std::vector<double> positions{-50.0, 50.0};
    std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125, 0.0015625};
    double margin = 5.0;
    double dx_factor = 0.1;              // macro dx = dx_factor * epsilon
    double positivity_fraction = 0.25;   // level = fraction * delta
    bool require_positivity = false;
    double layer_half_width = 3200.0;    // layer used by the supersolution check
    double layer_dx = 0.2;
};

/// Every section of a run. Unknown keys are rejected; absent keys keep these defaults.
struct RunConfig {
    PotentialSection potential;
    OperatorSection op;  // "operator" in files
    LayerOptions layer;
    CorrectorOptions corrector;
    ParticlesSection particles;
    EvolutionSection evolution;
    HarnessSection harness;
};

/// Reads and validates a JSON config. Throws ConfigError naming the key path (with a
/// suggestion for misspelt keys) or ParseError for malformed JSON.
RunConfig parse_config(const std::string& path);
RunConfig config_from_string(const std::string& text);

/// Canonical JSON (all keys, fixed order) and its FNV-1a 64-bit hash in hex.
std::string config_to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);
/// Edit distance used for key suggestions.
std::size_t levenshtein(const std::string& a, const std::string& b);

}  // namespace pnlab
