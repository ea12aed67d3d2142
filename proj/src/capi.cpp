#include "kernelflow/kernelflow.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "kernelflow/config.hpp"
#include "kernelflow/pricing.hpp"
#include "kernelflow/runner.hpp"

using namespace kernelflow;

struct kf_config {
    std::string text;
    std::string base_dir;
    ConfigOverrides overrides;
    ScenarioConfig parsed;
};

struct kf_filter {
    std::unique_ptr<Filter> filter;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_summary;

int fail(int status, std::string msg)
{
    last_error = std::move(msg);
    return status;
}

template <class F>
int guarded(F&& f)
{
    try {
        last_error.clear();
        f();
        return KF_OK;
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        for (const auto& i : e.issues()) msg += "\n  " + i.path + ": " + i.message;
        return fail(static_cast<int>(e.code()), msg);
    } catch (const Error& e) {
        return fail(static_cast<int>(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail(KF_INTERNAL, e.what());
    } catch (...) {
        return fail(KF_INTERNAL, "unknown exception");
    }
}

void reparse(kf_config& c) { c.parsed = parse_config(c.text, c.overrides, c.base_dir); }

}  // namespace

extern "C" {

const char* kf_version(void) { return kVersion; }

const char* kf_status_name(int status)
{
    if (status == KF_INVALID_ARGUMENT) return "InvalidArgument";
    if (status == KF_INTERNAL) return "Internal";
    if (status < 0 || status > KF_IO_ERROR) return "Unknown";
    static thread_local std::string name;
    name = std::string(to_string(static_cast<Errc>(status)));
    return name.c_str();
}

const char* kf_last_error(void) { return last_error.c_str(); }
const char* kf_last_summary(void) { return last_summary.c_str(); }

int kf_config_parse(const char* json_text, const char* base_dir, kf_config** out)
{
    if (!json_text || !out) return fail(KF_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto c = std::make_unique<kf_config>();
        c->text = json_text;
        c->base_dir = base_dir ? base_dir : ".";
        reparse(*c);
        *out = c.release();
    });
}

int kf_config_load(const char* path, kf_config** out)
{
    if (!path || !out) return fail(KF_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(KF_IO_ERROR, std::string("cannot open config '") + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path().string();
    return kf_config_parse(ss.str().c_str(), dir.empty() ? "." : dir.c_str(), out);
}

int kf_config_set_seed(kf_config* cfg, uint64_t seed)
{
    if (!cfg) return fail(KF_INVALID_ARGUMENT, "null config");
    return guarded([&] {
        cfg->overrides.seed = seed;
        reparse(*cfg);
    });
}

int kf_config_set_paths(kf_config* cfg, size_t n_paths)
{
    if (!cfg) return fail(KF_INVALID_ARGUMENT, "null config");
    return guarded([&] {
        cfg->overrides.n_paths = n_paths;
        reparse(*cfg);
    });
}

int kf_config_set_output(kf_config* cfg, const char* dir)
{
    if (!cfg || !dir) return fail(KF_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        cfg->overrides.output = dir;
        reparse(*cfg);
    });
}

int kf_config_hash(const kf_config* cfg, char* buf, size_t len)
{
    if (!cfg || !buf) return fail(KF_INVALID_ARGUMENT, "null argument");
    const auto h = fnv1a_hex(cfg->parsed.canonical);
    if (len <= h.size()) return fail(KF_INVALID_ARGUMENT, "buffer too small");
    std::memcpy(buf, h.c_str(), h.size() + 1);
    return KF_OK;
}

void kf_config_free(kf_config* cfg) { delete cfg; }

int kf_run(const kf_config* cfg, const char* subcommand, size_t threads, int* acceptance_ok)
{
    if (!cfg || !subcommand) return fail(KF_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto res = run(cfg->parsed, subcommand, threads);
        last_summary = res.summary;
        if (acceptance_ok) *acceptance_ok = res.acceptance_ok ? 1 : 0;
    });
}

int kf_filter_create(const kf_config* cfg, kf_filter** out)
{
    if (!cfg || !out) return fail(KF_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const auto& c = cfg->parsed;
        require(c.density.has_value(), Errc::schema_error, "config has no density");
        auto model = std::make_shared<const FilterModel>(*c.density, c.v());
        auto f = std::make_unique<kf_filter>();
        f->filter = std::make_unique<Filter>(std::move(model), c.dt);
        *out = f.release();
    });
}

size_t kf_filter_dim(const kf_filter* f) { return f ? f->filter->model().dim() : 0; }

int kf_filter_step(kf_filter* f, const double* dxi, size_t dim)
{
    if (!f || !dxi) return fail(KF_INVALID_ARGUMENT, "null argument");
    if (dim != f->filter->model().dim()) return fail(KF_DIMENSION_MISMATCH, "increment dimension mismatch");
    return guarded([&] { f->filter->step({dxi, dim}); });
}

int kf_filter_kernel(const kf_filter* f, kf_kernel_point* out)
{
    if (!f || !out) return fail(KF_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto kp = kernel(f->filter->state(), f->filter->v_nodes(), false);
        *out = {kp.t, kp.pi, kp.Pi, kp.r, kp.N};
    });
}

int kf_filter_risk_premium(const kf_filter* f, double* lambda, size_t dim)
{
    if (!f || !lambda) return fail(KF_INVALID_ARGUMENT, "null argument");
    if (dim != f->filter->model().dim()) return fail(KF_DIMENSION_MISMATCH, "lambda dimension mismatch");
    return guarded([&] {
        const auto kp = kernel(f->filter->state(), f->filter->v_nodes(), false);
        std::copy(kp.lambda.begin(), kp.lambda.end(), lambda);
    });
}

int kf_filter_bond_price(const kf_filter* f, double maturity, double* out)
{
    if (!f || !out) return fail(KF_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *out = bond_price(f->filter->state(), maturity); });
}

void kf_filter_free(kf_filter* f) { delete f; }

}  // extern "C"
