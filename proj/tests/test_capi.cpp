#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kernelflow/kernelflow.h"

namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "horizon": 0.4, "dt": 0.01, "n_paths": 6, "seed": 5, "brownian_dim": 2,
  "checkpoints": [0.2, 0.4],
  "density": {"family": "exponential", "rate": 0.05, "n_grid": 800},
  "structure": {"kind": "separable_exponential", "c": [0.8, 0.4], "decay": 0.1},
  "alpha": {"kind": "constant", "value": [0.2, 0.0]},
  "assets": [{"id": "EQ", "S0": 100, "sigma": [0.15, 0.05]}],
  "claims": [{"id": "call", "payoff": "call", "strike": 100, "expiry": 0.4, "asset": "EQ"},
             {"id": "bond", "payoff": "bond", "expiry": 0.4}],
  "diagnose": {"particles": 20000, "times": [0.2]},
  "dump": {"paths": 2, "every": 5}
})";

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

struct Config {
    kf_config* c = nullptr;
    explicit Config(const char* text) { REQUIRE(kf_config_parse(text, ".", &c) == KF_OK); }
    ~Config() { kf_config_free(c); }
};

}  // namespace

TEST_CASE("version and status names")
{
    CHECK(std::string(kf_version()) == "0.1.0");
    CHECK(std::string(kf_status_name(KF_OK)) == "Ok");
    CHECK(std::string(kf_status_name(KF_NON_ORTHOGONAL)) == "NonOrthogonal");
    CHECK(std::string(kf_status_name(KF_INVALID_ARGUMENT)) == "InvalidArgument");
    CHECK(std::string(kf_status_name(12345)) == "Unknown");
}

TEST_CASE("config errors come back as codes")
{
    kf_config* c = nullptr;
    CHECK(kf_config_parse("{oops", ".", &c) == KF_SCHEMA_ERROR);
    CHECK(c == nullptr);
    CHECK(std::string(kf_last_error()).size() > 0);
    CHECK(kf_config_parse(nullptr, ".", &c) == KF_INVALID_ARGUMENT);
    CHECK(kf_config_load("/nonexistent.json", &c) == KF_IO_ERROR);
    CHECK(kf_config_parse(R"({"dt": -1})", ".", &c) != KF_OK);
    CHECK(std::string(kf_last_error()).find("dt") != std::string::npos);
    kf_config_free(nullptr);
}

TEST_CASE("overrides and hash")
{
    Config a(kSmall);
    char h0[17], h1[17], h2[17];
    REQUIRE(kf_config_hash(a.c, h0, sizeof h0) == KF_OK);
    REQUIRE(kf_config_set_output(a.c, "somewhere") == KF_OK);
    REQUIRE(kf_config_hash(a.c, h1, sizeof h1) == KF_OK);
    CHECK(std::string(h0) == std::string(h1));
    REQUIRE(kf_config_set_seed(a.c, 6) == KF_OK);
    REQUIRE(kf_config_hash(a.c, h2, sizeof h2) == KF_OK);
    CHECK(std::string(h0) != std::string(h2));
    CHECK(kf_config_set_paths(a.c, 7) == KF_INVARIANT_VIOLATION);
    char small[4];
    CHECK(kf_config_hash(a.c, small, sizeof small) == KF_INVALID_ARGUMENT);
}

TEST_CASE("streaming filter")
{
    Config a(kSmall);
    kf_filter* f = nullptr;
    REQUIRE(kf_filter_create(a.c, &f) == KF_OK);
    CHECK(kf_filter_dim(f) == 2);
    kf_kernel_point k{};
    REQUIRE(kf_filter_kernel(f, &k) == KF_OK);
    CHECK(k.t == 0.0);
    CHECK(std::abs(k.N - 1.0) < 1e-14);
    CHECK(std::abs(k.Pi - 1.0) < 1e-12);
    const double dxi[2] = {0.02, -0.01};
    for (int i = 0; i < 10; ++i) REQUIRE(kf_filter_step(f, dxi, 2) == KF_OK);
    REQUIRE(kf_filter_kernel(f, &k) == KF_OK);
    CHECK(std::abs(k.t - 0.1) < 1e-12);
    CHECK(std::abs(k.pi - k.N * k.Pi) < 1e-12);
    CHECK(k.r > 0.0);
    double lam[2];
    REQUIRE(kf_filter_risk_premium(f, lam, 2) == KF_OK);
    CHECK(lam[0] < 0.0);
    double P = 0.0;
    REQUIRE(kf_filter_bond_price(f, 5.0, &P) == KF_OK);
    CHECK(P > 0.0);
    CHECK(P < 1.0);
    CHECK(kf_filter_bond_price(f, 0.05, &P) == KF_OUT_OF_RANGE);
    CHECK(kf_filter_step(f, dxi, 3) == KF_DIMENSION_MISMATCH);
    CHECK(kf_filter_risk_premium(f, lam, 1) == KF_DIMENSION_MISMATCH);
    kf_filter_free(f);
}

TEST_CASE("runs write deterministic outputs")
{
    const fs::path root = fs::temp_directory_path() / "kf_capi_test";
    fs::remove_all(root);
    Config a(kSmall);
    std::vector<std::string> summaries;
    for (std::size_t threads : {1u, 3u}) {
        const auto dir = root / ("t" + std::to_string(threads));
        REQUIRE(kf_config_set_output(a.c, dir.c_str()) == KF_OK);
        int ok = 0;
        REQUIRE(kf_run(a.c, "simulate", threads, &ok) == KF_OK);
        CHECK(ok == 1);
        CHECK(fs::exists(dir / "manifest.json"));
        CHECK(fs::exists(dir / "paths.csv"));
        summaries.push_back(slurp(dir / "summary.csv"));
    }
    CHECK(summaries[0] == summaries[1]);
    CHECK(summaries[0].rfind("# manifest: {", 0) == 0);

    REQUIRE(kf_config_set_output(a.c, (root / "p").c_str()) == KF_OK);
    int ok = 0;
    REQUIRE(kf_run(a.c, "price", 2, &ok) == KF_OK);
    CHECK(slurp(root / "p" / "prices.csv").find("\ncall,") != std::string::npos);
    REQUIRE(kf_run(a.c, "invariance-test", 2, &ok) == KF_OK);
    CHECK(fs::exists(root / "p" / "invariance.csv"));
    CHECK(std::string(kf_last_summary()).size() > 0);
    REQUIRE(kf_run(a.c, "filter-diagnose", 2, &ok) == KF_OK);
    CHECK(fs::exists(root / "p" / "diagnose.csv"));
    CHECK(kf_run(a.c, "bubble-demo", 1, &ok) == KF_CONFIG_MISMATCH);
    CHECK(kf_run(a.c, "nonsense", 1, &ok) == KF_SCHEMA_ERROR);
    CHECK(kf_run(a.c, nullptr, 1, &ok) == KF_INVALID_ARGUMENT);
    fs::remove_all(root);
}
