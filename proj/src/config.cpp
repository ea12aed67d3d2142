#include "kernelflow/config.hpp"

#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kernelflow {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues)
{
    std::string s = fmt::format("{} config problem(s)", issues.size());
    for (const auto& i : issues) s += fmt::format("\n  {}: {}: {}", to_string(i.code), i.path, i.message);
    return s;
}

class Reader {
public:
    explicit Reader(std::string base_dir) : base_dir_(std::move(base_dir)) {}

    std::vector<ConfigIssue> issues;

    void fail(Errc code, const std::string& path, const std::string& msg) { issues.push_back({code, path, msg}); }

    static std::string key(const std::string& path, const std::string& k) { return path.empty() ? k : path + "." + k; }

    const json* child(const json& obj, const std::string& k) const
    {
        if (!obj.is_object()) return nullptr;
        const auto it = obj.find(k);
        return it == obj.end() || it->is_null() ? nullptr : &*it;
    }

    std::optional<double> number(const json& obj, const std::string& path, const std::string& k, bool required)
    {
        const json* j = child(obj, k);
        const auto p = key(path, k);
        if (!j) {
            if (required) fail(Errc::schema_error, p, "required number missing");
            return std::nullopt;
        }
        if (!j->is_number()) {
            fail(Errc::schema_error, p, "expected a number");
            return std::nullopt;
        }
        const double v = j->get<double>();
        if (!std::isfinite(v)) {
            fail(Errc::invariant_violation, p, "must be finite");
            return std::nullopt;
        }
        return v;
    }

    double number_or(const json& obj, const std::string& path, const std::string& k, double dflt)
    {
        return number(obj, path, k, false).value_or(dflt);
    }

    std::optional<std::uint64_t> count(const json& obj, const std::string& path, const std::string& k, bool required)
    {
        const json* j = child(obj, k);
        const auto p = key(path, k);
        if (!j) {
            if (required) fail(Errc::schema_error, p, "required integer missing");
            return std::nullopt;
        }
        if (!j->is_number_integer() || (j->is_number_integer() && !j->is_number_unsigned() && j->get<std::int64_t>() < 0)) {
            fail(Errc::schema_error, p, "expected a non-negative integer");
            return std::nullopt;
        }
        return j->get<std::uint64_t>();
    }

    std::optional<std::string> string(const json& obj, const std::string& path, const std::string& k, bool required)
    {
        const json* j = child(obj, k);
        const auto p = key(path, k);
        if (!j) {
            if (required) fail(Errc::schema_error, p, "required string missing");
            return std::nullopt;
        }
        if (!j->is_string()) {
            fail(Errc::schema_error, p, "expected a string");
            return std::nullopt;
        }
        return j->get<std::string>();
    }

    std::optional<bool> boolean(const json& obj, const std::string& path, const std::string& k)
    {
        const json* j = child(obj, k);
        if (!j) return std::nullopt;
        if (!j->is_boolean()) {
            fail(Errc::schema_error, key(path, k), "expected true or false");
            return std::nullopt;
        }
        return j->get<bool>();
    }

    std::optional<Vec> vec(const json& j, const std::string& p)
    {
        if (!j.is_array() || j.empty()) {
            fail(Errc::schema_error, p, "expected a non-empty array of numbers");
            return std::nullopt;
        }
        Vec out;
        for (const auto& x : j) {
            if (!x.is_number() || !std::isfinite(x.get<double>())) {
                fail(Errc::schema_error, p, "expected finite numbers");
                return std::nullopt;
            }
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::optional<Vec> vec(const json& obj, const std::string& path, const std::string& k, bool required)
    {
        const json* j = child(obj, k);
        if (!j) {
            if (required) fail(Errc::schema_error, key(path, k), "required array missing");
            return std::nullopt;
        }
        return vec(*j, key(path, k));
    }

    bool dim_ok(const Vec& v, std::size_t d, const std::string& p, const std::string& what)
    {
        if (v.size() == d) return true;
        fail(Errc::dimension_mismatch, p, fmt::format("{} has dimension {}, brownian_dim is {}", what, v.size(), d));
        return false;
    }

    // Constant vector, or {"times": [...], "values": [[...]], "interp": "piecewise"|"linear"}.
    std::optional<Schedule> schedule(const json& j, const std::string& p, std::size_t d, const std::string& what)
    {
        if (j.is_array()) {
            auto v = vec(j, p);
            if (!v || !dim_ok(*v, d, p, what)) return std::nullopt;
            return Schedule::constant(*v);
        }
        if (!j.is_object()) {
            fail(Errc::schema_error, p, "expected an array or a {times, values} object");
            return std::nullopt;
        }
        auto times = vec(j, p, "times", true);
        const json* vals = child(j, "values");
        if (!vals || !vals->is_array()) {
            fail(Errc::schema_error, key(p, "values"), "expected an array of vectors");
            return std::nullopt;
        }
        std::vector<Vec> values;
        for (std::size_t i = 0; i < vals->size(); ++i) {
            auto v = vec((*vals)[i], fmt::format("{}.values[{}]", p, i));
            if (!v) return std::nullopt;
            if (!dim_ok(*v, d, fmt::format("{}.values[{}]", p, i), what)) return std::nullopt;
            values.push_back(*v);
        }
        if (!times) return std::nullopt;
        const auto mode = string(j, p, "interp", false).value_or("piecewise");
        if (mode != "piecewise" && mode != "linear") {
            fail(Errc::schema_error, key(p, "interp"), "must be 'piecewise' or 'linear'");
            return std::nullopt;
        }
        try {
            return mode == "linear" ? Schedule::linear(*times, values) : Schedule::piecewise(*times, values);
        } catch (const Error& e) {
            fail(e.code(), p, e.what());
        }
        return std::nullopt;
    }

    std::string resolve(const std::string& file) const
    {
        std::filesystem::path f(file);
        return f.is_absolute() ? file : (std::filesystem::path(base_dir_) / f).string();
    }

private:
    std::string base_dir_;
};

std::optional<InitialDensity> read_density(Reader& r, const json& root)
{
    const json* j = r.child(root, "density");
    if (!j) {
        r.fail(Errc::schema_error, "density", "required object missing");
        return std::nullopt;
    }
    const std::string p = "density";
    const auto family = r.string(*j, p, "family", true);
    DensityGrid g;
    g.u_max = r.number_or(*j, p, "u_max", 300.0);
    g.n_grid = r.count(*j, p, "n_grid", false).value_or(2000);
    g.eps_tail = r.number_or(*j, p, "eps_tail", 1e-6);
    if (!family) return std::nullopt;
    try {
        if (*family == "exponential") {
            const auto rate = r.number(*j, p, "rate", true);
            if (rate) return InitialDensity::exponential(*rate, g);
        } else if (*family == "gamma") {
            const auto shape = r.number(*j, p, "shape", true);
            const auto rate = r.number(*j, p, "rate", true);
            if (shape && rate) return InitialDensity::gamma(*shape, *rate, g);
        } else if (*family == "tabulated" || *family == "curve") {
            const auto csv = r.string(*j, p, "csv", true);
            if (!csv) return std::nullopt;
            const auto rows = read_numeric_csv(r.resolve(*csv));
            std::vector<double> a, b;
            for (const auto& row : rows) {
                if (row.size() < 2) raise(Errc::schema_error, "density CSV rows need two columns");
                a.push_back(row[0]);
                b.push_back(row[1]);
            }
            if (*family == "curve") return density_from_curve({a, b}, g.eps_tail);
            return InitialDensity::tabulated(a, b, g.eps_tail);
        } else {
            r.fail(Errc::schema_error, "density.family", fmt::format("unknown family '{}'", *family));
        }
    } catch (const Error& e) {
        r.fail(e.code(), p, e.what());
    }
    return std::nullopt;
}

std::optional<StructureFunction> read_structure(Reader& r, const json& root, std::size_t d)
{
    const json* j = r.child(root, "structure");
    if (!j) return StructureFunction::zero(d);
    const std::string p = "structure";
    const auto kind = r.string(*j, p, "kind", true);
    if (!kind) return std::nullopt;
    try {
        if (*kind == "zero") return StructureFunction::zero(d);
        if (*kind == "constant" || *kind == "separable_exponential") {
            auto c = r.vec(*j, p, "c", true);
            if (!c || !r.dim_ok(*c, d, "structure.c", "structure c")) return std::nullopt;
            if (*kind == "constant") return StructureFunction::constant(*c);
            const auto decay = r.number(*j, p, "decay", true);
            if (decay) return StructureFunction::separable_exponential(*c, *decay);
            return std::nullopt;
        }
        if (*kind == "ou_state_dependent") {
            const auto sigma = r.number(*j, p, "sigma", true);
            if (sigma) return StructureFunction::ou_state_dependent(*sigma, d);
            return std::nullopt;
        }
        if (*kind == "tabulated") {
            const auto csv = r.string(*j, p, "csv", true);
            const auto interp = r.string(*j, p, "time_interp", false).value_or("linear");
            if (interp != "linear" && interp != "step") {
                r.fail(Errc::schema_error, "structure.time_interp", "must be 'linear' or 'step'");
                return std::nullopt;
            }
            if (!csv) return std::nullopt;
            const auto rows = read_numeric_csv(r.resolve(*csv));
            std::set<double> ts, us;
            std::map<std::pair<double, double>, Vec> cells;
            for (const auto& row : rows) {
                if (row.size() != 2 + d)
                    raise(Errc::dimension_mismatch,
                          fmt::format("tabulated structure rows need t, u and {} components", d));
                ts.insert(row[0]);
                us.insert(row[1]);
                cells[{row[0], row[1]}] = Vec(row.begin() + 2, row.end());
            }
            require(cells.size() == ts.size() * us.size(), Errc::schema_error,
                    "tabulated structure must cover the full (t, u) lattice");
            std::vector<double> values;
            for (double t : ts)
                for (double u : us) {
                    const auto& v = cells.at({t, u});
                    values.insert(values.end(), v.begin(), v.end());
                }
            return StructureFunction::tabulated({ts.begin(), ts.end()}, {us.begin(), us.end()}, std::move(values), d,
                                                interp == "step" ? TabulatedKind::TimeInterpolation::step
                                                                 : TabulatedKind::TimeInterpolation::linear);
        }
        r.fail(Errc::schema_error, "structure.kind", fmt::format("unknown kind '{}'", *kind));
    } catch (const Error& e) {
        r.fail(e.code(), p, e.what());
    }
    return std::nullopt;
}

NoiseDrift read_alpha(Reader& r, const json& root, std::size_t d)
{
    const json* j = r.child(root, "alpha");
    if (!j) return Schedule::zero(d);
    if (j->is_array()) return r.schedule(*j, "alpha", d, "alpha").value_or(Schedule::zero(d));
    const auto kind = r.string(*j, "alpha", "kind", false).value_or("schedule");
    if (kind == "zero") return Schedule::zero(d);
    if (kind == "constant") {
        auto v = r.vec(*j, "alpha", "value", true);
        if (v && r.dim_ok(*v, d, "alpha.value", "alpha")) return Schedule::constant(*v);
        return Schedule::zero(d);
    }
    return r.schedule(*j, "alpha", d, "alpha").value_or(Schedule::zero(d));
}

Window read_window(Reader& r, const json& obj, const std::string& path, const std::string& k, Window dflt)
{
    auto v = r.vec(obj, path, k, false);
    if (!v) return dflt;
    if (v->size() != 2 || (*v)[1] <= (*v)[0]) {
        r.fail(Errc::invariant_violation, Reader::key(path, k), "window must be [start, end] with end > start");
        return dflt;
    }
    return {dflt.name, (*v)[0], (*v)[1]};
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(issues.empty() ? Errc::schema_error : issues.front().code, join_issues(issues)),
      issues_(std::move(issues))
{
}

TimeGrid ScenarioConfig::grid() const
{
    return {dt, static_cast<std::size_t>(std::llround(horizon / dt))};
}

StructureFunction ScenarioConfig::v() const
{
    require(structure.has_value(), Errc::schema_error, "structure missing");
    return alpha.is_zero() ? *structure : recompose(*structure, alpha);
}

std::string fnv1a_hex(const std::string& data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& file)
{
    std::ifstream in(file);
    if (!in) raise(Errc::io_error, fmt::format("cannot open '{}'", file));
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (...) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            raise(Errc::schema_error, fmt::format("non-numeric row in '{}': {}", file, line));
        }
        first = false;
        rows.push_back(std::move(row));
    }
    return rows;
}

ScenarioConfig parse_config(const std::string& text, const ConfigOverrides& overrides, const std::string& base_dir)
{
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError({{Errc::schema_error, "<document>", e.what()}});
    }
    if (!root.is_object()) throw ConfigError({{Errc::schema_error, "<document>", "top level must be an object"}});
    if (overrides.seed) root["seed"] = *overrides.seed;
    if (overrides.n_paths) root["n_paths"] = *overrides.n_paths;
    if (overrides.output) root["output"] = *overrides.output;

    Reader r(base_dir);
    ScenarioConfig c;
    {
        auto hashed = root;
        hashed.erase("output");  // where results go does not change them
        c.canonical = hashed.dump();
    }
    c.horizon = r.number_or(root, "", "horizon", c.horizon);
    c.dt = r.number_or(root, "", "dt", c.dt);
    c.n_paths = r.count(root, "", "n_paths", false).value_or(c.n_paths);
    c.seed = r.count(root, "", "seed", false).value_or(c.seed);
    c.brownian_dim = r.count(root, "", "brownian_dim", false).value_or(c.brownian_dim);
    c.antithetic = r.boolean(root, "", "antithetic").value_or(c.antithetic);
    c.output = r.string(root, "", "output", false).value_or(c.output);
    if (auto cp = r.vec(root, "", "checkpoints", false))
        c.checkpoints = *cp;
    else
        std::erase_if(c.checkpoints, [&](double t) { return t > c.horizon; });
    if (auto m = r.string(root, "", "measure", false)) {
        if (*m == "P")
            c.measure = Measure::P;
        else if (*m == "R")
            c.measure = Measure::R;
        else if (*m == "P_alpha")
            c.measure = Measure::PAlpha;
        else
            r.fail(Errc::schema_error, "measure", "must be one of P, R, P_alpha");
    }

    if (!(c.dt > 0.0)) r.fail(Errc::invariant_violation, "dt", "dt must be > 0");
    if (!(c.horizon > 0.0)) r.fail(Errc::invariant_violation, "horizon", "horizon must be > 0");
    if (c.dt > 0.0 && c.horizon > 0.0) {
        const double steps = c.horizon / c.dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            r.fail(Errc::invariant_violation, "horizon", "horizon / dt must be an integer");
    }
    if (c.n_paths < 2) r.fail(Errc::invariant_violation, "n_paths", "n_paths must be >= 2");
    if (c.antithetic && c.n_paths % 2) r.fail(Errc::invariant_violation, "n_paths", "antithetic runs need an even n_paths");
    if (c.brownian_dim < 1) r.fail(Errc::invariant_violation, "brownian_dim", "brownian_dim must be >= 1");
    const std::size_t d = std::max<std::size_t>(c.brownian_dim, 1);
    for (std::size_t i = 0; i < c.checkpoints.size(); ++i)
        if (c.checkpoints[i] < 0.0 || c.checkpoints[i] > c.horizon)
            r.fail(Errc::invariant_violation, fmt::format("checkpoints[{}]", i), "checkpoint outside [0, horizon]");

    c.density = read_density(r, root);
    c.structure = read_structure(r, root, d);
    c.alpha = read_alpha(r, root, d);

    if (const json* assets = r.child(root, "assets")) {
        if (!assets->is_array())
            r.fail(Errc::schema_error, "assets", "expected an array");
        else
            for (std::size_t i = 0; i < assets->size(); ++i) {
                const auto& a = (*assets)[i];
                const auto p = fmt::format("assets[{}]", i);
                AssetSpec s;
                s.id = r.string(a, p, "id", true).value_or(fmt::format("asset{}", i));
                s.S0 = r.number_or(a, p, "S0", 1.0);
                s.sector = r.string(a, p, "sector", false).value_or("");
                if (!(s.S0 > 0.0)) r.fail(Errc::invariant_violation, p + ".S0", "S0 must be > 0");
                const json* sig = r.child(a, "sigma");
                if (!sig) {
                    r.fail(Errc::schema_error, p + ".sigma", "required volatility missing");
                    continue;
                }
                const auto sched = r.schedule(*sig, p + ".sigma", d, fmt::format("asset '{}' volatility", s.id));
                if (!sched) continue;
                s.sigma = *sched;
                c.assets.push_back(std::move(s));
            }
    }

    if (const json* claims = r.child(root, "claims")) {
        if (!claims->is_array())
            r.fail(Errc::schema_error, "claims", "expected an array");
        else
            for (std::size_t i = 0; i < claims->size(); ++i) {
                const auto& j = (*claims)[i];
                const auto p = fmt::format("claims[{}]", i);
                ClaimSpec cl;
                cl.id = r.string(j, p, "id", true).value_or(fmt::format("claim{}", i));
                const auto payoff = r.string(j, p, "payoff", true).value_or("bond");
                if (payoff == "call")
                    cl.payoff = ClaimSpec::Payoff::call;
                else if (payoff == "put")
                    cl.payoff = ClaimSpec::Payoff::put;
                else if (payoff == "bond")
                    cl.payoff = ClaimSpec::Payoff::bond;
                else if (payoff == "custom")
                    cl.payoff = ClaimSpec::Payoff::custom;
                else
                    r.fail(Errc::schema_error, p + ".payoff", "must be call, put, bond or custom");
                cl.expiry = r.number(j, p, "expiry", true).value_or(0.0);
                cl.strike = r.number_or(j, p, "strike", 0.0);
                if (cl.strike < 0.0) r.fail(Errc::invariant_violation, p + ".strike", "strike must be >= 0");
                if (cl.expiry <= 0.0 || cl.expiry > c.horizon)
                    r.fail(Errc::invariant_violation, p + ".expiry", "expiry must lie in (0, horizon]");
                if (cl.needs_asset()) {
                    cl.asset = r.string(j, p, "asset", true).value_or("");
                    const bool known = std::any_of(c.assets.begin(), c.assets.end(),
                                                   [&](const AssetSpec& a) { return a.id == cl.asset; });
                    if (!known) r.fail(Errc::config_mismatch, p + ".asset", fmt::format("unknown asset '{}'", cl.asset));
                }
                if (cl.payoff == ClaimSpec::Payoff::custom) {
                    const json* t = r.child(j, "table");
                    if (!t || !t->is_array() || t->size() < 2)
                        r.fail(Errc::schema_error, p + ".table", "custom payoff needs a table of [S, payoff] rows");
                    else
                        for (const auto& row : *t) {
                            auto v = r.vec(row, p + ".table");
                            if (!v || v->size() != 2) break;
                            if (!cl.table_s.empty() && (*v)[0] <= cl.table_s.back()) {
                                r.fail(Errc::invariant_violation, p + ".table", "S values must increase");
                                break;
                            }
                            cl.table_s.push_back((*v)[0]);
                            cl.table_h.push_back((*v)[1]);
                        }
                }
                c.claims.push_back(std::move(cl));
            }
    }

    if (const json* b = r.child(root, "bubble")) {
        BubbleSpec s;
        const std::string p = "bubble";
        if (auto dir = r.vec(*b, p, "direction", true); dir && r.dim_ok(*dir, d, "bubble.direction", "bubble direction")) {
            const double n = norm(*dir);
            if (std::abs(n - 1.0) > 1e-9) r.fail(Errc::invariant_violation, "bubble.direction", "must be a unit vector");
            s.schedule.direction = *dir;
        }
        s.schedule.start = r.number_or(*b, p, "start", 0.0);
        s.schedule.peak = r.number_or(*b, p, "peak", 0.4);
        s.schedule.t1 = r.number_or(*b, p, "t1", 1.0);
        s.schedule.tau = r.number_or(*b, p, "tau", 0.25);
        s.schedule.post_reveal_vol_scale = r.number_or(*b, p, "post_reveal_vol_scale", 2.0);
        s.schedule.reveal_strength = r.number_or(*b, p, "reveal_strength", 2.0);
        s.schedule.reveal_decay = r.number_or(*b, p, "reveal_decay", 0.2);
        if (s.schedule.start < 0.0 || s.schedule.peak < 0.0)
            r.fail(Errc::invariant_violation, "bubble.peak", "magnitudes must be >= 0");
        if (s.schedule.post_reveal_vol_scale < 1.0)
            r.fail(Errc::invariant_violation, "bubble.post_reveal_vol_scale", "must be >= 1");
        if (auto e = r.vec(*b, p, "info_direction", true); e && r.dim_ok(*e, d, "bubble.info_direction", "info direction"))
            s.info_direction = *e;
        s.info_strength = r.number_or(*b, p, "info_strength", 1.0);
        s.info_decay = r.number_or(*b, p, "info_decay", 0.1);
        s.similarity_threshold = r.number_or(*b, p, "similarity_threshold", 0.9);
        s.growth = read_window(r, *b, p, "growth", {"growth", 0.0, s.schedule.t1});
        s.post = read_window(r, *b, p, "post", s.post);
        if (std::max(s.growth.end, s.post.end) > c.horizon + 1e-12)
            r.fail(Errc::invariant_violation, "bubble.post", "windows must end within the horizon");
        const json* secs = r.child(*b, "sectors");
        if (!secs || !secs->is_array() || secs->empty())
            r.fail(Errc::schema_error, "bubble.sectors", "expected a non-empty array");
        else
            for (std::size_t i = 0; i < secs->size(); ++i) {
                const auto& j = (*secs)[i];
                const auto sp = fmt::format("bubble.sectors[{}]", i);
                SectorSpec sec;
                sec.name = r.string(j, sp, "name", true).value_or(fmt::format("sector{}", i));
                if (auto ax = r.vec(j, sp, "axis", true); ax && r.dim_ok(*ax, d, sp + ".axis", "sector axis"))
                    sec.axis = *ax;
                sec.cone_angle = r.number_or(j, sp, "cone_angle", 0.1);
                sec.n_assets = r.count(j, sp, "n_assets", false).value_or(4);
                sec.vol = r.number_or(j, sp, "vol", 0.2);
                sec.S0 = r.number_or(j, sp, "S0", 1.0);
                if (sec.n_assets < 1) r.fail(Errc::invariant_violation, sp + ".n_assets", "must be >= 1");
                s.sectors.push_back(std::move(sec));
            }
        c.bubble = std::move(s);
    }

    if (const json* pj = r.child(root, "premium")) {
        PremiumSpec s;
        const std::string p = "premium";
        if (auto a = r.vec(*pj, p, "alpha", true); a && r.dim_ok(*a, d, "premium.alpha", "premium alpha")) s.alpha = *a;
        if (auto se = r.vec(*pj, p, "sigma_equity", true); se && r.dim_ok(*se, d, "premium.sigma_equity", "equity volatility"))
            s.sigma_equity = *se;
        if (auto bm = r.vec(*pj, p, "bond_maturities", true)) s.bond_maturities = *bm;
        s.orthogonality_tol = r.number_or(*pj, p, "orthogonality_tol", 1e-8);
        s.horizon = r.number_or(*pj, p, "horizon", std::min(2.0, c.horizon));
        if (s.horizon > c.horizon + 1e-12) r.fail(Errc::invariant_violation, "premium.horizon", "exceeds horizon");
        c.premium = std::move(s);
    }

    if (const json* dj = r.child(root, "diagnose")) {
        c.diagnose.particles = r.count(*dj, "diagnose", "particles", false).value_or(c.diagnose.particles);
        if (auto t = r.vec(*dj, "diagnose", "times", false)) c.diagnose.times = *t;
    }
    if (c.diagnose.times.empty()) c.diagnose.times = c.checkpoints;
    if (const json* dj = r.child(root, "dump")) {
        c.dump.paths = r.count(*dj, "dump", "paths", false).value_or(c.dump.paths);
        c.dump.every = std::max<std::uint64_t>(1, r.count(*dj, "dump", "every", false).value_or(1));
        c.dump.density_snapshots = r.boolean(*dj, "dump", "density_snapshots").value_or(false);
    }

    static const std::set<std::string> known{"horizon", "dt", "n_paths", "seed", "brownian_dim", "measure",
                                             "antithetic", "output", "checkpoints", "density", "structure",
                                             "alpha", "assets", "claims", "bubble", "premium", "diagnose", "dump"};
    for (const auto& [k, v] : root.items())
        if (!known.count(k)) r.fail(Errc::schema_error, k, "unknown field");

    if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
    return c;
}

ScenarioConfig parse_config(const std::string& text, const std::string& base_dir)
{
    return parse_config(text, ConfigOverrides{}, base_dir);
}

ScenarioConfig load_config(const std::string& file, const ConfigOverrides& overrides)
{
    std::ifstream in(file);
    if (!in) throw ConfigError({{Errc::io_error, file, "cannot open config file"}});
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(file).parent_path().string();
    return parse_config(ss.str(), overrides, dir.empty() ? std::string(".") : dir);
}

}  // namespace kernelflow
