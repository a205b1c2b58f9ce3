#include "pnlab/archive.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

#include "pnlab/error.hpp"

namespace pnlab {

using json = nlohmann::ordered_json;

namespace {

const char* const kMagic = "# pnlab-profile";

json tail_to_json(const TailModel& t)
{
    return {{"kind", to_string(t.kind)},
            {"left_limit", t.left_limit},
            {"right_limit", t.right_limit},
            {"left_coefficient", t.left_coefficient},
            {"right_coefficient", t.right_coefficient},
            {"exponent", t.exponent},
            {"center", t.center}};
}

template <class T>
T field(const json& j, const char* key, const std::string& path)
{
    if (!j.contains(key)) throw ParseError(path + ": header lacks '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(path + ": header field '" + key + "' has the wrong type");
    }
}

TailModel tail_from_json(const json& j, const std::string& path)
{
    TailModel t;
    t.kind = tail_kind_from_string(field<std::string>(j, "kind", path));
    t.left_limit = field<double>(j, "left_limit", path);
    t.right_limit = field<double>(j, "right_limit", path);
    t.left_coefficient = field<double>(j, "left_coefficient", path);
    t.right_coefficient = field<double>(j, "right_coefficient", path);
    t.exponent = field<double>(j, "exponent", path);
    t.center = field<double>(j, "center", path);
    return t;
}

json grid_to_json(const Grid& g)
{
    return {{"x_min", g.x_min}, {"dx", g.dx}, {"size", g.size}};
}

std::string render(const json& header, const std::string& columns, const Grid& g,
                   const std::vector<const std::vector<double>*>& cols)
{
    std::string out;
    out.reserve(g.size * 26 * (cols.size() + 1) + 512);
    out += kMagic;
    out += '\n';
    out += header.dump();
    out += '\n';
    out += columns;
    out += '\n';
    char buf[32];
    for (std::size_t i = 0; i < g.size; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", g.x(static_cast<std::ptrdiff_t>(i)));
        out += buf;
        for (const auto* c : cols) {
            std::snprintf(buf, sizeof buf, ",%.17g", (*c)[i]);
            out += buf;
        }
        out += '\n';
    }
    out += "# end rows=" + std::to_string(g.size) + "\n";
    return out;
}

struct Parsed {
    json header;
    Grid grid;
    std::vector<std::vector<double>> cols;
};

Parsed parse(const std::string& path, const std::string& expect_kind,
             const std::vector<std::string>& columns)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open profile '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw ParseError(path + ": not a profile file (missing '" + std::string(kMagic) + "')");
    if (!std::getline(in, line)) throw ParseError(path + ": truncated before the header");
    Parsed p;
    try {
        p.header = json::parse(line);
    } catch (const json::parse_error&) {
        throw ParseError(path + ": header is not valid JSON");
    }
    const int version = field<int>(p.header, "format_version", path);
    if (version != kProfileFormatVersion)
        throw VersionError(path + ": format_version " + std::to_string(version) +
                           " is not supported (this build reads version " +
                           std::to_string(kProfileFormatVersion) + ")");
    const auto kind = field<std::string>(p.header, "profile", path);
    if (!expect_kind.empty() && kind != expect_kind)
        throw ParseError(path + ": holds a " + kind + " profile, expected " + expect_kind);
    if (!p.header.contains("grid")) throw ParseError(path + ": header lacks 'grid'");
    const auto& g = p.header.at("grid");
    p.grid.x_min = field<double>(g, "x_min", path);
    p.grid.dx = field<double>(g, "dx", path);
    p.grid.size = field<std::size_t>(g, "size", path);
    if (!(p.grid.dx > 0.0) || p.grid.size < 3) throw ParseError(path + ": invalid grid");

    std::string expect_cols = "x";
    for (const auto& c : columns) expect_cols += "," + c;
    if (!std::getline(in, line) || line != expect_cols)
        throw ParseError(path + ": expected column row '" + expect_cols + "'");

    p.cols.assign(columns.size(), std::vector<double>(p.grid.size));
    std::size_t rows = 0;
    bool ended = false;
    while (std::getline(in, line)) {
        if (line.rfind("# end rows=", 0) == 0) {
            if (line != "# end rows=" + std::to_string(rows))
                throw ParseError(path + ": end marker disagrees with the row count");
            ended = true;
            break;
        }
        if (rows >= p.grid.size) throw ParseError(path + ": more rows than the grid size");
        const char* c = line.c_str();
        char* end = nullptr;
        const double x = std::strtod(c, &end);
        if (end == c || x != p.grid.x(static_cast<std::ptrdiff_t>(rows)))
            throw ParseError(path + ": row " + std::to_string(rows) + " has a bad x value");
        for (std::size_t k = 0; k < columns.size(); ++k) {
            if (*end != ',') throw ParseError(path + ": row " + std::to_string(rows) + " is short");
            c = end + 1;
            const double v = std::strtod(c, &end);
            if (end == c) throw ParseError(path + ": row " + std::to_string(rows) + " is malformed");
            p.cols[k][rows] = v;
        }
        if (*end != '\0') throw ParseError(path + ": row " + std::to_string(rows) + " has extra data");
        ++rows;
    }
    if (!ended) throw ParseError(path + ": truncated (no end marker)");
    if (rows != p.grid.size)
        throw ParseError(path + ": " + std::to_string(rows) + " rows for a grid of " +
                         std::to_string(p.grid.size));
    return p;
}

}  // namespace

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_comment(const std::string& config_hash)
{
    return std::string("# pnlab ") + PNLAB_VERSION + " config " + config_hash + "\n";
}

void write_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ConfigError("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot rename onto '" + path + "': " + ec.message());
    }
}

void save_profile(const LayerProfile& p, const std::string& path)
{
    if (!(p.u.grid == p.du.grid)) throw ArgumentError("save_profile: u and du grids differ");
    json h;
    h["format_version"] = kProfileFormatVersion;
    h["profile"] = "layer";
    h["tool_version"] = PNLAB_VERSION;
    h["s"] = p.s;
    h["gamma"] = p.gamma;
    h["eta"] = p.eta;
    h["beta"] = p.beta;
    h["residual_norm"] = p.residual_norm;
    h["gauge"] = "u(0) = 1/2";
    h["relaxation_steps"] = p.relaxation_steps;
    h["newton_steps"] = p.newton_steps;
    h["grid"] = grid_to_json(p.u.grid);
    h["tails"] = {{"u", tail_to_json(p.u.tail)}, {"du", tail_to_json(p.du.tail)}};
    write_atomic(path, render(h, "x,u,du", p.u.grid, {&p.u.values, &p.du.values}));
}

void save_profile(const CorrectorProfile& p, const std::string& path)
{
    json h;
    h["format_version"] = kProfileFormatVersion;
    h["profile"] = "corrector";
    h["tool_version"] = PNLAB_VERSION;
    h["s"] = p.s;
    h["eta"] = p.eta;
    h["residual_norm"] = p.residual_norm;
    h["solvability_defect"] = p.solvability_defect;
    h["orthogonality_defect"] = p.orthogonality_defect;
    h["iterations"] = p.iterations;
    h["gauge"] = "<psi, u'> = 0";
    h["grid"] = grid_to_json(p.psi.grid);
    h["tails"] = {{"psi", tail_to_json(p.psi.tail)}};
    write_atomic(path, render(h, "x,psi", p.psi.grid, {&p.psi.values}));
}

LayerProfile load_layer_profile(const std::string& path)
{
    auto f = parse(path, "layer", {"u", "du"});
    LayerProfile p;
    p.s = field<double>(f.header, "s", path);
    p.gamma = field<double>(f.header, "gamma", path);
    p.eta = field<double>(f.header, "eta", path);
    p.beta = field<double>(f.header, "beta", path);
    p.residual_norm = field<double>(f.header, "residual_norm", path);
    p.relaxation_steps = field<long>(f.header, "relaxation_steps", path);
    p.newton_steps = field<int>(f.header, "newton_steps", path);
    if (!f.header.contains("tails")) throw ParseError(path + ": header lacks 'tails'");
    const auto& t = f.header.at("tails");
    if (!t.contains("u") || !t.contains("du")) throw ParseError(path + ": incomplete tails");
    p.u = GridFunction(f.grid, std::move(f.cols[0]), tail_from_json(t.at("u"), path));
    p.du = GridFunction(f.grid, std::move(f.cols[1]), tail_from_json(t.at("du"), path));
    return p;
}

CorrectorProfile load_corrector_profile(const std::string& path)
{
    auto f = parse(path, "corrector", {"psi"});
    CorrectorProfile p;
    p.s = field<double>(f.header, "s", path);
    p.eta = field<double>(f.header, "eta", path);
    p.residual_norm = field<double>(f.header, "residual_norm", path);
    p.solvability_defect = field<double>(f.header, "solvability_defect", path);
    p.orthogonality_defect = field<double>(f.header, "orthogonality_defect", path);
    p.iterations = field<int>(f.header, "iterations", path);
    if (!f.header.contains("tails") || !f.header.at("tails").contains("psi"))
        throw ParseError(path + ": header lacks the psi tail");
    p.psi = GridFunction(f.grid, std::move(f.cols[0]),
                         tail_from_json(f.header.at("tails").at("psi"), path));
    return p;
}

std::string profile_kind(const std::string& path)
{
    std::ifstream in(path);
    std::string line;
    if (!in || !std::getline(in, line) || line != kMagic)
        throw ParseError(path + ": not a profile file");
    if (!std::getline(in, line)) throw ParseError(path + ": truncated before the header");
    try {
        return field<std::string>(json::parse(line), "profile", path);
    } catch (const json::parse_error&) {
        throw ParseError(path + ": header is not valid JSON");
    }
}

}  // namespace pnlab
