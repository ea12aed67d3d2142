#include "kernelflow/info_filter.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "kernelflow/error.hpp"

namespace kernelflow {

namespace {

void node_norm2(std::span<const double> v, std::size_t dim, std::span<double> out)
{
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += v[i * dim + j] * v[i * dim + j];
        out[i] = s;
    }
}

// l_i += v_i.dxi - 1/2 |v_i|^2 dt, the single place where log weights are accumulated.
void accumulate_log_weights(std::span<const double> v, std::span<const double> v2,
                            std::span<const double> dxi, double dt, std::span<double> lw)
{
    const std::size_t n = lw.size();
    const std::size_t d = dxi.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += v[i * d + j] * dxi[j];
        lw[i] += s - 0.5 * v2[i] * dt;
    }
}

void normalise(FilterState& s)
{
    const auto& m = *s.model;
    s.max_log_weight = *std::max_element(s.log_weights.begin(), s.log_weights.end());
    require(std::isfinite(s.max_log_weight), Errc::numerical_underflow, "non-finite log weights");
    s.density.resize(m.nodes());
    simd::scaled_exp(m.prior.values(), s.log_weights, s.max_log_weight, s.density);
    const double z = m.quad().integrate(s.density);
    require(z > 0.0 && std::isfinite(z), Errc::numerical_underflow,
            fmt::format("posterior mass vanished at t = {}", s.t()));
    const double inv = 1.0 / z;
    for (auto& x : s.density) x *= inv;
    s.log_norm = s.max_log_weight + std::log(z);
}

void check_dim(const FilterModel& m, std::span<const double> dxi)
{
    require(dxi.size() == m.dim(), Errc::dimension_mismatch,
            fmt::format("information increment has dimension {}, filter {}", dxi.size(), m.dim()));
}

}  // namespace

InformationPath simulate_brownian(const TimeGrid& grid, std::size_t dim, std::uint64_t seed,
                                  std::uint64_t path, bool antithetic)
{
    return {Path(grid, dim, brownian_increments(seed, path, grid.steps, dim, grid.dt, antithetic)),
            Measure::P, std::nullopt};
}

InformationPath simulate_information(const StructureFunction& v, const InitialDensity& d,
                                     const TimeGrid& grid, RandomStream& rng, const GaussianNoiseSpec* noise)
{
    require(grid.dt > 0.0, Errc::invariant_violation, "dt must be positive");
    const std::size_t dim = v.dim();
    const double X = d.quantile(rng.uniform());
    const double sq = std::sqrt(grid.dt);
    std::vector<double> z(grid.steps * dim);
    rng.normals(z);
    bool drifted = false;
    if (noise) {
        require(noise->b.dim() == dim, Errc::dimension_mismatch, "noise drift must match the Brownian dimension");
        require(noise->gamma.dim() == 1, Errc::dimension_mismatch, "noise scale must be scalar");
        drifted = !noise->b.is_zero();
    }
    std::vector<double> inc(grid.steps * dim);
    Vec xi(dim, 0.0), s(dim), b(dim, 0.0), g(1, 1.0);
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const double t = grid.time(k);
        v.eval_into(t, X, xi, s);
        if (noise) {
            noise->b.at(t, b);
            noise->gamma.at(t, g);
        }
        for (std::size_t j = 0; j < dim; ++j) {
            const double dn = noise ? b[j] * grid.dt + g[0] * sq * z[k * dim + j] : sq * z[k * dim + j];
            inc[k * dim + j] = s[j] * grid.dt + dn;
            xi[j] += inc[k * dim + j];
        }
    }
    return {Path(grid, dim, std::move(inc)), drifted ? Measure::PAlpha : Measure::R, X};
}

FilterModel::FilterModel(InitialDensity prior_, StructureFunction v_)
    : prior(std::move(prior_)), v(std::move(v_)), grid_v(v, prior.grid())
{
    if (grid_v.time_independent()) {
        v_norm2.resize(prior.grid().size());
        node_norm2(grid_v.values(0.0), v.dim(), v_norm2);
    }
}

FilterState prior_state(std::shared_ptr<const FilterModel> model, double dt)
{
    require(model != nullptr, Errc::invariant_violation, "filter model missing");
    require(dt > 0.0, Errc::invariant_violation, "dt must be positive");
    FilterState s;
    s.dt = dt;
    s.log_weights.assign(model->nodes(), 0.0);
    s.model = std::move(model);
    normalise(s);
    return s;
}

FilterState posterior(std::shared_ptr<const FilterModel> model, const InformationPath& path, double t)
{
    require(model != nullptr, Errc::invariant_violation, "filter model missing");
    require(model->v.deterministic(), Errc::not_applicable,
            "exact posterior needs a deterministic structure function");
    const auto& grid = path.xi.grid();
    const std::size_t K = grid.index_of(t);
    require(K <= grid.steps, Errc::out_of_range, "t beyond the path horizon");
    check_dim(*model, path.xi.increment(0));
    FilterState s;
    s.dt = grid.dt;
    s.step = K;
    s.log_weights.assign(model->nodes(), 0.0);
    const std::size_t n = model->nodes(), d = model->dim();
    std::vector<double> v(n * d), v2(n);
    for (std::size_t k = 0; k < K; ++k) {
        if (model->grid_v.time_independent()) {
            if (k == 0) model->grid_v.values(0.0, v);
            accumulate_log_weights(v, model->v_norm2, path.xi.increment(k), grid.dt, s.log_weights);
        } else {
            model->grid_v.values(grid.time(k), v);
            node_norm2(v, d, v2);
            accumulate_log_weights(v, v2, path.xi.increment(k), grid.dt, s.log_weights);
        }
    }
    s.model = std::move(model);
    normalise(s);
    return s;
}

FilterState update_incremental(const FilterState& state, std::span<const double> dxi, double dt)
{
    const auto& m = *state.model;
    check_dim(m, dxi);
    require(std::abs(dt - state.dt) <= 1e-12 * state.dt, Errc::invariant_violation,
            "update step must equal the grid step");
    FilterState s = state;
    const std::size_t n = m.nodes(), d = m.dim();
    std::vector<double> v(n * d);
    m.grid_v.values(state.t(), v);
    if (m.grid_v.time_independent()) {
        accumulate_log_weights(v, m.v_norm2, dxi, state.dt, s.log_weights);
    } else {
        std::vector<double> v2(n);
        node_norm2(v, d, v2);
        accumulate_log_weights(v, v2, dxi, state.dt, s.log_weights);
    }
    ++s.step;
    normalise(s);
    return s;
}

Vec vhat(const FilterState& state, std::span<const double> v_nodes)
{
    Vec out(state.model->dim());
    state.model->quad().integrate_weighted(state.density, v_nodes, out);
    return out;
}

Vec vhat(const FilterState& state) { return vhat(state, state.model->grid_v.values(state.t())); }

// ---------------------------------------------------------------------------
// Filter

Filter::Filter(std::shared_ptr<const FilterModel> model, double dt)
{
    state_ = prior_state(std::move(model), dt);
    v_.resize(state_.model->nodes() * state_.model->dim());
    v2_.resize(state_.model->nodes());
    refresh_v();
}

void Filter::reset()
{
    state_.step = 0;
    std::fill(state_.log_weights.begin(), state_.log_weights.end(), 0.0);
    normalise(state_);
    refresh_v();
}

void Filter::refresh_v()
{
    const auto& m = *state_.model;
    if (m.grid_v.time_independent()) {
        if (state_.step == 0) {
            m.grid_v.values(0.0, v_);
            std::copy(m.v_norm2.begin(), m.v_norm2.end(), v2_.begin());
        }
        return;
    }
    m.grid_v.values(state_.t(), v_);
    node_norm2(v_, m.dim(), v2_);
}

void Filter::step(std::span<const double> dxi)
{
    check_dim(*state_.model, dxi);
    accumulate_log_weights(v_, v2_, dxi, state_.dt, state_.log_weights);
    ++state_.step;
    normalise(state_);
    refresh_v();
}

// ---------------------------------------------------------------------------

Path innovations(const InformationPath& path, std::span<const double> vhat_series)
{
    const auto& xi = path.xi;
    const std::size_t d = xi.dim(), K = xi.steps();
    require(vhat_series.size() == K * d, Errc::dimension_mismatch, "one vhat per step expected");
    std::vector<double> w(K * d);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < d; ++j)
            w[k * d + j] = xi.increment(k)[j] - vhat_series[k * d + j] * xi.grid().dt;
    return Path(xi.grid(), d, std::move(w));
}

std::vector<double> kushner_step(const Quadrature& quad, std::span<const double> density,
                                 std::span<const double> dxi, std::span<const double> v_nodes, double dt,
                                 KushnerScheme scheme)
{
    const std::size_t n = density.size(), d = dxi.size();
    require(v_nodes.size() == n * d, Errc::dimension_mismatch, "structure values do not match the density grid");
    Vec vh(d);
    quad.integrate_weighted(density, v_nodes, vh);
    Vec dy(d);
    for (std::size_t j = 0; j < d; ++j) dy[j] = dxi[j] - vh[j] * dt;

    std::vector<double> cov;
    if (scheme == KushnerScheme::milstein) {
        cov.assign(d * d, 0.0);
        std::vector<double> prod(n);
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = j; k < d; ++k) {
                for (std::size_t i = 0; i < n; ++i)
                    prod[i] = density[i] * (v_nodes[i * d + j] - vh[j]) * (v_nodes[i * d + k] - vh[k]);
                cov[j * d + k] = cov[k * d + j] = quad.integrate(prod);
            }
    }

    std::vector<double> out(n);
    Vec e(d);
    for (std::size_t i = 0; i < n; ++i) {
        double g = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            e[j] = v_nodes[i * d + j] - vh[j];
            g += e[j] * dy[j];
        }
        if (scheme == KushnerScheme::milstein) {
            double c = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k)
                    c += (e[j] * e[k] - cov[j * d + k]) * (dxi[j] * dxi[k] - (j == k ? dt : 0.0));
            g += 0.5 * c;
        }
        out[i] = density[i] * g;
        if (out[i] < 0.0)
            raise(Errc::negative_density,
                  fmt::format("Kushner step drove node {} negative; reduce the step", i));
    }
    const double z = quad.integrate(out);
    require(z > 0.0, Errc::numerical_underflow, "Kushner density lost all mass");
    for (auto& x : out) x /= z;
    return out;
}

std::vector<double> kushner_propagate(const FilterModel& model, const InformationPath& path, double t,
                                      KushnerScheme scheme)
{
    const auto& grid = path.xi.grid();
    const std::size_t K = grid.index_of(t);
    std::vector<double> rho = model.prior.values();
    std::vector<double> v(model.nodes() * model.dim());
    model.grid_v.values(0.0, v);
    for (std::size_t k = 0; k < K; ++k) {
        if (!model.grid_v.time_independent()) model.grid_v.values(grid.time(k), v);
        rho = kushner_step(model.quad(), rho, path.xi.increment(k), v, grid.dt, scheme);
    }
    return rho;
}

double l1_distance(const Quadrature& quad, std::span<const double> a, std::span<const double> b)
{
    require(a.size() == b.size() && a.size() == quad.size(), Errc::dimension_mismatch,
            "densities must share the grid");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = std::abs(a[i] - b[i]);
    return quad.integrate(diff);
}

}  // namespace kernelflow
