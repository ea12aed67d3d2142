#include "kernelflow/structure_function.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "kernelflow/error.hpp"

namespace kernelflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Index k and weight w such that x lies in [grid[k], grid[k+1]], clamped at both ends.
std::pair<std::size_t, double> bracket(const std::vector<double>& grid, double x)
{
    const std::size_t n = grid.size();
    if (n == 1 || x <= grid.front()) return {0, 0.0};
    if (x >= grid.back()) return {n - 2, 1.0};
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - grid.begin()) - 1;
    return {k, (x - grid[k]) / (grid[k + 1] - grid[k])};
}

void check_strictly_increasing(const std::vector<double>& g, const char* what)
{
    require(!g.empty(), Errc::invariant_violation, fmt::format("{} is empty", what));
    for (std::size_t i = 1; i < g.size(); ++i)
        require(g[i] > g[i - 1], Errc::invariant_violation, fmt::format("{} not strictly increasing", what));
}

}  // namespace

StructureFunction::StructureFunction(Kind kind, std::size_t dim) : kind_(std::move(kind)), dim_(dim)
{
    require(dim_ >= 1, Errc::invariant_violation, "structure function dimension must be >= 1");
    std::visit(overloaded{
                   [&](const ConstantKind& k) {
                       require(k.c.size() == dim_, Errc::dimension_mismatch, "constant c has wrong dimension");
                   },
                   [&](const SeparableExponentialKind& k) {
                       require(k.c.size() == dim_, Errc::dimension_mismatch,
                               "separable_exponential c has wrong dimension");
                       require(std::isfinite(k.decay), Errc::invariant_violation, "decay must be finite");
                   },
                   [&](const TabulatedKind& k) {
                       check_strictly_increasing(k.t_grid, "tabulated t_grid");
                       check_strictly_increasing(k.u_grid, "tabulated u_grid");
                       require(k.values.size() == k.t_grid.size() * k.u_grid.size() * dim_,
                               Errc::dimension_mismatch, "tabulated values must be t x u x dim");
                       for (double x : k.values)
                           require(std::isfinite(x), Errc::invariant_violation, "tabulated values must be finite");
                   },
                   [&](const OuStateDependentKind& k) {
                       require(k.sigma >= 0.0 && std::isfinite(k.sigma), Errc::invariant_violation,
                               "OU sigma must be >= 0");
                   },
               },
               kind_);
}

StructureFunction StructureFunction::zero(std::size_t dim) { return constant(Vec(dim, 0.0)); }

StructureFunction StructureFunction::constant(Vec c)
{
    const auto d = c.size();
    return {ConstantKind{std::move(c)}, d};
}

StructureFunction StructureFunction::separable_exponential(Vec c, double decay)
{
    const auto d = c.size();
    return {SeparableExponentialKind{std::move(c), decay}, d};
}

StructureFunction StructureFunction::tabulated(std::vector<double> t_grid, std::vector<double> u_grid,
                                               std::vector<double> values, std::size_t dim,
                                               TabulatedKind::TimeInterpolation time_interp)
{
    return {TabulatedKind{std::move(t_grid), std::move(u_grid), std::move(values), time_interp}, dim};
}

StructureFunction StructureFunction::ou_state_dependent(double sigma, std::size_t dim)
{
    return {OuStateDependentKind{sigma}, dim};
}

bool StructureFunction::deterministic() const noexcept
{
    return !std::holds_alternative<OuStateDependentKind>(kind_);
}

bool StructureFunction::time_independent() const noexcept
{
    bool base_static = std::visit(overloaded{
                                      [](const ConstantKind&) { return true; },
                                      [](const SeparableExponentialKind&) { return true; },
                                      [](const TabulatedKind& k) { return k.t_grid.size() == 1; },
                                      [](const OuStateDependentKind&) { return false; },
                                  },
                                  kind_);
    return base_static &&
           std::all_of(shifts_.begin(), shifts_.end(), [](const Shift& s) { return s.drift.knots() == 1; });
}

void StructureFunction::base_into(double t, double u, std::span<const double> state,
                                  std::span<double> out) const
{
    std::visit(overloaded{
                   [&](const ConstantKind& k) { std::copy(k.c.begin(), k.c.end(), out.begin()); },
                   [&](const SeparableExponentialKind& k) {
                       const double e = std::exp(-k.decay * u);
                       for (std::size_t j = 0; j < dim_; ++j) out[j] = k.c[j] * e;
                   },
                   [&](const TabulatedKind& k) {
                       const auto [it, wt] = bracket(k.t_grid, t);
                       const auto [iu, wu] = bracket(k.u_grid, u);
                       const std::size_t nu = k.u_grid.size();
                       const std::size_t nt = k.t_grid.size();
                       auto at = [&](std::size_t a, std::size_t b, std::size_t j) {
                           return k.values[(a * nu + b) * dim_ + j];
                       };
                       const std::size_t iu1 = nu > 1 ? iu + 1 : iu;
                       std::size_t it1 = nt > 1 ? it + 1 : it;
                       double wtt = wt;
                       if (k.time_interp == TabulatedKind::TimeInterpolation::step) {
                           // Hold the last knot at or before t.
                           if (wt >= 1.0 && nt > 1) {
                               it1 = it + 1;
                               wtt = 1.0;
                           } else {
                               it1 = it;
                               wtt = 0.0;
                           }
                       }
                       for (std::size_t j = 0; j < dim_; ++j) {
                           const double a0 = at(it, iu, j) + wu * (at(it, iu1, j) - at(it, iu, j));
                           const double a1 = at(it1, iu, j) + wu * (at(it1, iu1, j) - at(it1, iu, j));
                           out[j] = a0 + wtt * (a1 - a0);
                       }
                   },
                   [&](const OuStateDependentKind& k) {
                       require(state.size() == dim_, Errc::missing_state,
                               "ou_state_dependent structure needs the current information value");
                       for (std::size_t j = 0; j < dim_; ++j) out[j] = k.sigma * u * state[j];
                   },
               },
               kind_);
}

void StructureFunction::add_shifts(double t, std::span<double> out) const
{
    Vec a(dim_);
    for (const auto& s : shifts_) {
        s.drift.at(t, a);
        for (std::size_t j = 0; j < dim_; ++j) out[j] += s.sign * a[j];
    }
}

void StructureFunction::eval_into(double t, double u, std::span<const double> state,
                                  std::span<double> out) const
{
    base_into(t, u, state, out);
    add_shifts(t, out);
}

Vec StructureFunction::eval(double t, double u, std::span<const double> state) const
{
    Vec out(dim_);
    eval_into(t, u, state, out);
    return out;
}

StructureFunction StructureFunction::with_shift(const NoiseDrift& drift, double sign) const
{
    require(drift.dim() == dim_, Errc::dimension_mismatch,
            fmt::format("noise drift has dimension {}, structure function {}", drift.dim(), dim_));
    StructureFunction out = *this;
    if (!out.shifts_.empty() && out.shifts_.back().sign == -sign && out.shifts_.back().drift == drift) {
        out.shifts_.pop_back();
        return out;
    }
    out.shifts_.push_back({sign, drift});
    return out;
}

StructureFunction StructureFunction::base() const
{
    StructureFunction out = *this;
    out.shifts_.clear();
    return out;
}

StructureFunction decompose(const StructureFunction& v, const NoiseDrift& alpha)
{
    return v.with_shift(alpha, +1.0);
}

StructureFunction recompose(const StructureFunction& phi, const NoiseDrift& alpha)
{
    return phi.with_shift(alpha, -1.0);
}

// ---------------------------------------------------------------------------
// GridStructure

GridStructure::GridStructure(const StructureFunction& v, std::span<const double> u_grid)
    : function_(v), nodes_(u_grid.size()), dim_(v.dim()), time_independent_(v.time_independent())
{
    require(v.deterministic(), Errc::not_applicable,
            "state-dependent structure functions cannot be tabulated on a grid");
    const StructureFunction base = v.base();
    auto profile_at = [&](double t) {
        std::vector<double> p(nodes_ * dim_);
        for (std::size_t i = 0; i < nodes_; ++i)
            base.eval_into(t, u_grid[i], {}, std::span<double>(p.data() + i * dim_, dim_));
        return p;
    };
    if (const auto* tab = std::get_if<TabulatedKind>(&v.kind()); tab && tab->t_grid.size() > 1) {
        knot_times_ = tab->t_grid;
        time_interp_ = tab->time_interp;
        for (double t : knot_times_) profiles_.push_back(profile_at(t));
    } else {
        knot_times_ = {0.0};
        profiles_.push_back(profile_at(0.0));
    }
}

void GridStructure::values(double t, std::span<double> out) const
{
    const std::size_t n = nodes_ * dim_;
    if (profiles_.size() == 1) {
        std::copy_n(profiles_.front().begin(), n, out.begin());
    } else {
        const auto [k, w] = bracket(knot_times_, t);
        const auto& a = profiles_[k];
        const auto& b = profiles_[k + 1];
        if (time_interp_ == TabulatedKind::TimeInterpolation::step) {
            const auto& src = w >= 1.0 ? b : a;
            std::copy_n(src.begin(), n, out.begin());
        } else {
            for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + w * (b[i] - a[i]);
        }
    }
    if (function_.shifts().empty()) return;
    Vec shift(dim_, 0.0), a(dim_);
    for (const auto& s : function_.shifts()) {
        s.drift.at(t, a);
        for (std::size_t j = 0; j < dim_; ++j) shift[j] += s.sign * a[j];
    }
    for (std::size_t i = 0; i < nodes_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) out[i * dim_ + j] += shift[j];
}

std::vector<double> GridStructure::values(double t) const
{
    std::vector<double> out(nodes_ * dim_);
    values(t, out);
    return out;
}

// ---------------------------------------------------------------------------
// Noise constructions

Path gaussian_noise(const GaussianNoiseSpec& spec, const Path& beta)
{
    const std::size_t d = beta.dim();
    require(spec.b.dim() == d, Errc::dimension_mismatch, "noise drift b must match the Brownian dimension");
    require(spec.gamma.dim() == 1, Errc::dimension_mismatch, "noise scale gamma must be scalar");
    const auto& grid = beta.grid();
    std::vector<double> inc(grid.steps * d);
    Vec b(d), g(1);
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const double t = grid.time(k);
        spec.b.at(t, b);
        spec.gamma.at(t, g);
        require(g[0] > 0.0, Errc::invariant_violation, fmt::format("gamma must be positive (t = {})", t));
        const auto db = beta.increment(k);
        for (std::size_t j = 0; j < d; ++j) inc[k * d + j] = b[j] * grid.dt + g[0] * db[j];
    }
    return Path(grid, d, std::move(inc));
}

Path ou_information(double sigma, double X, const Path& beta)
{
    require(sigma >= 0.0, Errc::invariant_violation, "OU sigma must be >= 0");
    require(X > 0.0, Errc::invariant_violation, "OU information needs X > 0");
    const auto& grid = beta.grid();
    const std::size_t d = beta.dim();
    const double growth = std::exp(sigma * X * grid.dt);
    std::vector<double> xi((grid.steps + 1) * d, 0.0);
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const auto db = beta.increment(k);
        for (std::size_t j = 0; j < d; ++j) xi[(k + 1) * d + j] = growth * (xi[k * d + j] + db[j]);
    }
    return Path::from_values(grid, d, std::move(xi));
}

}  // namespace kernelflow
