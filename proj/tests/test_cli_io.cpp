#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "pnlab/archive.hpp"
#include "pnlab/config.hpp"
#include "pnlab/error.hpp"

using namespace pnlab;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text)
{
    std::ofstream(path, std::ios::binary) << text;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b)
{
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

const LayerProfile& small_layer()
{
    static const LayerProfile l = [] {
        LayerOptions o;
        o.half_width = 60.0;
        o.dx = 0.1;
        return solve_layer(Potential::builtin_cosine(), 0.25, o);
    }();
    return l;
}

struct TempDir {
    std::filesystem::path dir;
    TempDir()
    {
        static int counter = 0;
        dir = std::filesystem::temp_directory_path() /
              ("pnlab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() { std::filesystem::remove_all(dir); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("minimal config fills in defaults")
{
    const auto c = config_from_string("{}");
    CHECK(c.op.s == 0.25);
    CHECK(c.layer.half_width == 400.0);
    CHECK(c.layer.dx == 0.05);
    CHECK(c.corrector.tol == 1e-6);
    CHECK(c.particles.integrate.rtol == 1e-8);
    CHECK(c.particles.integrate.min_gap == 1e-6);
    CHECK(std::isnan(c.particles.gamma));
    CHECK(c.evolution.stepper.scheme == Scheme::explicit_euler);
    CHECK(c.harness.collar == 0.5);
    const auto d = config_from_string(R"({"operator": {"s": 0.1}, "evolution": {"scheme": "imex"}})");
    CHECK(d.op.s == 0.1);
    CHECK(d.evolution.stepper.scheme == Scheme::imex_reaction);
    CHECK(d.layer.tol == 1e-6);
}

TEST_CASE("out-of-range order is rejected with the range")
{
    try {
        config_from_string(R"({"operator": {"s": 0.7}})");
        FAIL("accepted s = 0.7");
    } catch (const ConfigError& e) {
        const std::string m = e.what();
        CHECK(m.find("operator.s") != std::string::npos);
        CHECK(m.find("0 < s < 1/2") != std::string::npos);
    }
    CHECK_THROWS_AS(config_from_string(R"({"evolution": {"epsilon": 0}})"), ConfigError);
    CHECK_THROWS_AS(config_from_string(R"({"particles": {"delta": -1}})"), ConfigError);
    CHECK_THROWS_AS(config_from_string(R"({"particles": {"positions": [1, 0]}})"), ConfigError);
    CHECK_THROWS_AS(config_from_string(R"({"layer": {"dx": "small"}})"), ConfigError);
    CHECK_THROWS_AS(config_from_string(R"({"particles": {"sigma": "wave:2"}})"), ConfigError);
    CHECK_THROWS_AS(config_from_string("{ not json"), ParseError);
}

TEST_CASE("unknown keys are rejected with a suggestion")
{
    try {
        config_from_string(R"({"potentail": {}})");
        FAIL("accepted a misspelt section");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("did you mean 'potential'") != std::string::npos);
    }
    try {
        config_from_string(R"({"layer": {"half_widht": 100}})");
        FAIL("accepted a misspelt key");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("layer.half_width") != std::string::npos);
    }
    CHECK(levenshtein("potentail", "potential") == 2);
    CHECK(levenshtein("", "abc") == 3);
}

TEST_CASE("canonical JSON round-trips and the hash tracks content")
{
    const auto c = config_from_string(R"({"particles": {"positions": [-1, 2.5], "gamma": 3}})");
    const auto again = config_from_string(config_to_json(c));
    CHECK(config_to_json(again) == config_to_json(c));
    CHECK(config_hash(again) == config_hash(c));
    CHECK(config_hash(c) != config_hash(config_from_string("{}")));
    CHECK(config_hash(c).size() == 16);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("layer profile round-trip is bit-exact")
{
    TempDir t;
    const auto& l = small_layer();
    const auto path = t.file("layer.csv");
    save_profile(l, path);
    CHECK(profile_kind(path) == "layer");
    const auto back = load_layer_profile(path);
    CHECK(back.u.grid == l.u.grid);
    CHECK(same_bits(back.u.values, l.u.values));
    CHECK(same_bits(back.du.values, l.du.values));
    CHECK(back.u.tail == l.u.tail);
    CHECK(back.du.tail == l.du.tail);
    CHECK(std::memcmp(&back.gamma, &l.gamma, sizeof(double)) == 0);
    CHECK(back.eta == l.eta);
    CHECK(back.s == l.s);
    // Saving the loaded profile gives identical bytes.
    const auto path2 = t.file("layer2.csv");
    save_profile(back, path2);
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("corrector profile round-trip is bit-exact")
{
    TempDir t;
    const auto psi = solve_corrector(small_layer(), Potential::builtin_cosine());
    const auto path = t.file("psi.csv");
    save_profile(psi, path);
    const auto back = load_corrector_profile(path);
    CHECK(same_bits(back.psi.values, psi.psi.values));
    CHECK(back.psi.tail == psi.psi.tail);
    CHECK(back.iterations == psi.iterations);
    CHECK_THROWS_AS(load_layer_profile(path), ParseError);
}

TEST_CASE("truncated or corrupted profiles are rejected")
{
    TempDir t;
    const auto path = t.file("layer.csv");
    save_profile(small_layer(), path);
    const auto text = slurp(path);

    spit(t.file("cut.csv"), text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_layer_profile(t.file("cut.csv")), ParseError);

    const auto no_end = text.substr(0, text.rfind("# end"));
    spit(t.file("noend.csv"), no_end);
    CHECK_THROWS_AS(load_layer_profile(t.file("noend.csv")), ParseError);

    spit(t.file("header.csv"), text.substr(0, 30));
    CHECK_THROWS_AS(load_layer_profile(t.file("header.csv")), ParseError);

    CHECK_THROWS_AS(load_layer_profile(t.file("missing.csv")), ParseError);
}

TEST_CASE("other format versions are refused")
{
    TempDir t;
    const auto path = t.file("layer.csv");
    save_profile(small_layer(), path);
    auto text = slurp(path);
    const std::string key = "\"format_version\":1";
    REQUIRE(text.find(key) != std::string::npos);
    text.replace(text.find(key), key.size(), "\"format_version\":0");
    spit(t.file("old.csv"), text);
    CHECK_THROWS_AS(load_layer_profile(t.file("old.csv")), VersionError);
}

TEST_CASE("atomic write leaves no temporary file")
{
    TempDir t;
    const auto path = t.file("sub/out.txt");
    write_atomic(path, "one\n");
    write_atomic(path, "two\n");
    CHECK(slurp(path) == "two\n");
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(t.dir / "sub")) {
        (void)e;
        ++n;
    }
    CHECK(n == 1);
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(csv_comment("abc").rfind("# pnlab ", 0) == 0);
}
