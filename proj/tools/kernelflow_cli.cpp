#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "kernelflow/kernelflow.h"

namespace {

// 0 ok, 1 a built-in check failed, 2 bad config, 3 runtime failure.
constexpr int kExitCheck = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::string config;
    std::string out;
    long long seed = -1;
    long long paths = -1;
    std::size_t threads = 0;
};

int report(int status, const char* what)
{
    std::fprintf(stderr, "kernelflow: %s failed [%s]\n%s\n", what, kf_status_name(status), kf_last_error());
    return status;
}

std::size_t threads_from(const Options& o)
{
    if (o.threads > 0) return o.threads;
    if (const char* env = std::getenv("KERNELFLOW_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    return 1;
}

int execute(const std::string& sub, const Options& o)
{
    kf_config* cfg = nullptr;
    if (int s = kf_config_load(o.config.c_str(), &cfg); s != KF_OK) {
        report(s, "loading config");
        return s == KF_IO_ERROR ? kExitRuntime : kExitConfig;
    }
    int s = KF_OK;
    if (o.seed >= 0 && s == KF_OK) s = kf_config_set_seed(cfg, static_cast<uint64_t>(o.seed));
    if (o.paths >= 0 && s == KF_OK) s = kf_config_set_paths(cfg, static_cast<size_t>(o.paths));
    if (!o.out.empty() && s == KF_OK) s = kf_config_set_output(cfg, o.out.c_str());
    if (s != KF_OK) {
        report(s, "applying overrides");
        kf_config_free(cfg);
        return kExitConfig;
    }
    if (sub == "validate") {
        char hash[32];
        kf_config_hash(cfg, hash, sizeof hash);
        std::printf("config ok, hash %s\n", hash);
        kf_config_free(cfg);
        return 0;
    }
    int ok = 1;
    s = kf_run(cfg, sub.c_str(), threads_from(o), &ok);
    kf_config_free(cfg);
    if (s != KF_OK) {
        report(s, sub.c_str());
        return (s == KF_SCHEMA_ERROR || s == KF_CONFIG_MISMATCH || s == KF_DIMENSION_MISMATCH) ? kExitConfig
                                                                                            : kExitRuntime;
    }
    std::printf("%s: %s\n", sub.c_str(), kf_last_summary());
    if (!ok) {
        std::fprintf(stderr, "%s: acceptance check failed\n", sub.c_str());
        return kExitCheck;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Information-based pricing kernel simulator"};
    app.set_version_flag("--version", std::string(kf_version()));
    app.require_subcommand(1);

    Options opt;
    const std::vector<std::pair<std::string, std::string>> subs{
        {"simulate", "simulate information paths, filter and kernel"},
        {"price", "Monte Carlo prices of configured claims"},
        {"filter-diagnose", "exact filter against a particle oracle and martingale checks"},
        {"invariance-test", "prices under alpha = 0 and the configured alpha"},
        {"bubble-demo", "bubble growth and burst scenario"},
        {"premium-demo", "equity premium with unchanged bond prices"},
        {"validate", "parse and validate a config only"},
    };
    for (const auto& [name, help] : subs) {
        auto* sc = app.add_subcommand(name, help);
        sc->add_option("-c,--config", opt.config, "scenario JSON")->required()->check(CLI::ExistingFile);
        sc->add_option("--seed", opt.seed, "override the master seed")->check(CLI::NonNegativeNumber);
        sc->add_option("--paths", opt.paths, "override n_paths")->check(CLI::PositiveNumber);
        sc->add_option("-o,--out", opt.out, "output directory");
        sc->add_option("-j,--threads", opt.threads, "worker threads (default KERNELFLOW_THREADS or 1)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    for (auto* sc : app.get_subcommands()) return execute(sc->get_name(), opt);
    return kExitConfig;
}
