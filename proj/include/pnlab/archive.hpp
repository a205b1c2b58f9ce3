#pragma once

#include <string>
#include <vector>

#include "pnlab/corrector_solver.hpp"
#include "pnlab/layer_solver.hpp"

namespace pnlab {

inline constexpr int kProfileFormatVersion = 1;

/// Profile files are text:
///
///   # pnlab-profile
///   {one-line JSON header: format_version, profile, grid, tails, scalars, tool_version}
///   x,u,du            (or x,psi)
///   <rows, 17 significant digits>
///   # end rows=N
///
/// Loading fails with ParseError unless every part is present and consistent, and with
/// VersionError for any other format_version. Writes go through a temporary file and a rename.
void save_profile(const LayerProfile& p, const std::string& path);
void save_profile(const CorrectorProfile& p, const std::string& path);
LayerProfile load_layer_profile(const std::string& path);
CorrectorProfile load_corrector_profile(const std::string& path);

/// "layer" or "corrector", read from the header.
std::string profile_kind(const std::string& path);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// %.17g
std::string format_double(double v);

/// "# pnlab <version> config <hash>" comment line (with newline) for CSV outputs.
std::string csv_comment(const std::string& config_hash);

}  // namespace pnlab
