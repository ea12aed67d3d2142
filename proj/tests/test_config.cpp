#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "kernelflow/config.hpp"
#include "support.hpp"

using namespace kernelflow;
using doctest::Approx;
using kftest::code_of;

namespace {

const std::string kConfigs = std::string(KF_SOURCE_DIR) + "/configs/";

const char* kMinimal = R"({
  "horizon": 1.0, "dt": 0.01, "n_paths": 10, "seed": 3, "brownian_dim": 2,
  "density": {"family": "exponential", "rate": 0.05},
  "structure": {"kind": "constant", "c": [0.3, 0.1]},
  "alpha": {"kind": "constant", "value": [0.1, 0.0]},
  "assets": [{"id": "A", "S0": 10, "sigma": [0.2, 0.0]}],
  "claims": [{"id": "c", "payoff": "call", "strike": 10, "expiry": 1.0, "asset": "A"}]
})";

bool has_issue(const ConfigError& e, Errc code, const std::string& path)
{
    for (const auto& i : e.issues())
        if (i.code == code && i.path == path) return true;
    return false;
}

ConfigError issues_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("config was accepted");
    return ConfigError({});
}

}  // namespace

TEST_CASE("shipped configs load")
{
    for (const char* f : {"default.json", "bubble.json", "premium.json"}) {
        CAPTURE(f);
        const auto c = load_config(kConfigs + f);
        CHECK(c.density.has_value());
        CHECK(c.structure.has_value());
        CHECK(c.grid().steps * c.dt == Approx(c.horizon));
    }
    const auto d = load_config(kConfigs + "default.json");
    CHECK(d.claims.size() == 3);
    CHECK(d.assets.at(0).id == "EQ");
    CHECK(d.dump.every == 25);
    CHECK(load_config(kConfigs + "bubble.json").bubble.has_value());
    CHECK(load_config(kConfigs + "premium.json").premium.has_value());
}

TEST_CASE("defaults and v = phi - alpha")
{
    const auto c = parse_config(kMinimal);
    CHECK(c.measure == Measure::P);
    CHECK(c.antithetic);
    CHECK(c.density->grid().size() == 2000);
    CHECK(c.density->u_max() == 300.0);
    const auto v = c.v().eval(0.5, 3.0);
    CHECK(v[0] == Approx(0.2));
    CHECK(v[1] == Approx(0.1));
    CHECK(c.claims[0].payoff == ClaimSpec::Payoff::call);
}

TEST_CASE("overrides and hashing")
{
    const auto a = parse_config(kMinimal);
    const auto b = parse_config(kMinimal, ConfigOverrides{std::nullopt, std::nullopt, std::string("elsewhere")});
    CHECK(b.output == "elsewhere");
    CHECK(fnv1a_hex(a.canonical) == fnv1a_hex(b.canonical));
    const auto c = parse_config(kMinimal, ConfigOverrides{99u, 20u, std::nullopt});
    CHECK(c.seed == 99);
    CHECK(c.n_paths == 20);
    CHECK(fnv1a_hex(a.canonical) != fnv1a_hex(c.canonical));
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("x").size() == 16);
}

TEST_CASE("every violation is reported")
{
    std::string t = kMinimal;
    t.replace(t.find("\"dt\": 0.01"), 10, "\"dt\": -1.0");
    t.replace(t.find("\"n_paths\": 10"), 13, "\"n_paths\": 7");
    t.insert(1, "\"colour\": \"red\", \"measure\": \"X\",");
    const auto e = issues_of(t);
    CHECK(e.issues().size() >= 4);
    CHECK(has_issue(e, Errc::invariant_violation, "dt"));
    CHECK(has_issue(e, Errc::invariant_violation, "n_paths"));
    CHECK(has_issue(e, Errc::schema_error, "colour"));
    CHECK(has_issue(e, Errc::schema_error, "measure"));
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
}

TEST_CASE("dimension and reference errors")
{
    std::string t = kMinimal;
    t.replace(t.find("\"sigma\": [0.2, 0.0]"), 19, "\"sigma\": [0.2]");
    t.replace(t.find("\"asset\": \"A\""), 12, "\"asset\": \"B\"");
    const auto e = issues_of(t);
    CHECK(has_issue(e, Errc::dimension_mismatch, "assets[0].sigma"));
    CHECK(has_issue(e, Errc::config_mismatch, "claims[0].asset"));

    CHECK(code_of([] { parse_config("{not json"); }) == Errc::schema_error);
    CHECK(code_of([] { parse_config("[1, 2]"); }) == Errc::schema_error);
    CHECK(code_of([] { load_config("/nonexistent/x.json"); }) == Errc::io_error);

    std::string h = kMinimal;
    h.replace(h.find("\"horizon\": 1.0"), 14, "\"horizon\": 1.005");
    CHECK(has_issue(issues_of(h), Errc::invariant_violation, "horizon"));
}

TEST_CASE("density and structure from CSV files")
{
    const auto dir = std::filesystem::temp_directory_path() / "kf_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "dens.csv");
        f << "# tabulated density\nu,rho\n";
        for (int i = 0; i <= 400; ++i) f << i * 0.5 << "," << 0.05 * std::exp(-0.05 * i * 0.5) << "\n";
    }
    const auto rows = read_numeric_csv((dir / "dens.csv").string());
    CHECK(rows.size() == 401);
    CHECK(rows[2][0] == 1.0);

    std::string t = kMinimal;
    const std::string from = "{\"family\": \"exponential\", \"rate\": 0.05}";
    t.replace(t.find(from), from.size(), "{\"family\": \"tabulated\", \"csv\": \"dens.csv\"}");
    const auto c = parse_config(t, dir.string());
    CHECK(c.density->survival(5.0) == Approx(std::exp(-0.25)).epsilon(1e-3));

    {
        std::ofstream f(dir / "bad.csv");
        f << "1,2\nx,y\n";
    }
    CHECK(code_of([&] { read_numeric_csv((dir / "bad.csv").string()); }) == Errc::schema_error);
    std::filesystem::remove_all(dir);
}
