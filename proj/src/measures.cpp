#include "kernelflow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "kernelflow/error.hpp"

namespace kernelflow {

namespace {

void check_series(std::span<const double> s, const Path& p, const char* what)
{
    require(s.size() == p.steps() * p.dim(), Errc::dimension_mismatch,
            std::string(what) + " must hold one vector per step");
}

}  // namespace

LikelihoodPath likelihood_N(const InformationPath& path, std::span<const double> vhat_series)
{
    const auto& xi = path.xi;
    check_series(vhat_series, xi, "vhat series");
    const std::size_t d = xi.dim();
    LikelihoodPath out{xi.grid(), std::vector<double>(xi.steps() + 1, 1.0), LikelihoodPath::Kind::N};
    double lg = 0.0;
    for (std::size_t k = 0; k < xi.steps(); ++k) {
        const std::span<const double> vh(vhat_series.data() + k * d, d);
        lg += dot(vh, xi.increment(k)) - 0.5 * norm2(vh) * xi.grid().dt;
        out.values[k + 1] = std::exp(lg);
    }
    return out;
}

LikelihoodPath likelihood_L(const NoiseDrift& alpha, const InformationPath& path)
{
    const auto& xi = path.xi;
    require(alpha.dim() == xi.dim(), Errc::dimension_mismatch, "noise drift must match the path dimension");
    LikelihoodPath out{xi.grid(), std::vector<double>(xi.steps() + 1, 1.0), LikelihoodPath::Kind::L};
    Vec a(xi.dim());
    double lg = 0.0;
    for (std::size_t k = 0; k < xi.steps(); ++k) {
        alpha.at(xi.grid().time(k), a);
        lg += -dot(a, xi.increment(k)) - 0.5 * norm2(a) * xi.grid().dt;
        out.values[k + 1] = std::exp(lg);
    }
    return out;
}

InformationPath shift_information(const InformationPath& path, const NoiseDrift& alpha)
{
    const auto& xi = path.xi;
    require(alpha.dim() == xi.dim(), Errc::dimension_mismatch, "noise drift must match the path dimension");
    const std::size_t d = xi.dim();
    std::vector<double> inc = xi.increments();
    Vec a(d);
    for (std::size_t k = 0; k < xi.steps(); ++k) {
        alpha.at(xi.grid().time(k), a);
        for (std::size_t j = 0; j < d; ++j) inc[k * d + j] += a[j] * xi.grid().dt;
    }
    return {Path(xi.grid(), d, std::move(inc)), path.measure, path.X};
}

PremiumDecomposition premium_decomposition(const FilterState& v_state, const FilterState& phi_state,
                                           const NoiseDrift& alpha)
{
    const std::size_t d = v_state.model->dim();
    require(phi_state.model->dim() == d && alpha.dim() == d, Errc::dimension_mismatch,
            "v, phi and alpha must share the Brownian dimension");
    require(v_state.step == phi_state.step, Errc::invariant_violation, "filter states at different times");
    PremiumDecomposition out;
    out.lambda = risk_premium_conditional(v_state);
    out.lambda_alpha = risk_premium_conditional(phi_state);
    const Vec a = alpha.at(v_state.t());
    out.residual = out.lambda - out.lambda_alpha - a;
    return out;
}

double premium_decomposition_sup(const InitialDensity& prior, const StructureFunction& v,
                                 const NoiseDrift& alpha, const InformationPath& path)
{
    const auto& grid = path.xi.grid();
    auto vm = std::make_shared<const FilterModel>(prior, v);
    auto pm = std::make_shared<const FilterModel>(prior, decompose(v, alpha));
    const auto shifted = shift_information(path, alpha);
    Filter fv(vm, grid.dt), fp(pm, grid.dt);
    Vec a(v.dim());
    double sup = 0.0;
    for (std::size_t k = 0;; ++k) {
        const auto kv = kernel(fv.state(), fv.v_nodes(), false);
        const auto kp = kernel(fp.state(), fp.v_nodes(), false);
        alpha.at(grid.time(k), a);
        for (std::size_t j = 0; j < a.size(); ++j)
            sup = std::max(sup, std::abs(kv.lambda[j] - kp.lambda[j] - a[j]));
        if (k == grid.steps) break;
        fv.step(path.xi.increment(k));
        fp.step(shifted.xi.increment(k));
    }
    return sup;
}

LikelihoodPath qr_density(std::span<const double> vhat_series, std::span<const double> lambda_series,
                          const Path& W)
{
    check_series(vhat_series, W, "vhat series");
    check_series(lambda_series, W, "lambda series");
    const std::size_t d = W.dim();
    LikelihoodPath out{W.grid(), std::vector<double>(W.steps() + 1, 1.0), LikelihoodPath::Kind::QR};
    double lg = 0.0;
    for (std::size_t k = 0; k < W.steps(); ++k) {
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double g = vhat_series[k * d + j] + lambda_series[k * d + j];
            a += g * W.increment(k)[j];
            b += g * g;
        }
        lg += -a - 0.5 * b * W.grid().dt;
        out.values[k + 1] = std::exp(lg);
    }
    return out;
}

InnovationPair innovation_pair(const InformationPath& path, std::span<const double> vhat_series,
                               std::span<const double> lambda_series)
{
    const auto& xi = path.xi;
    check_series(lambda_series, xi, "lambda series");
    const std::size_t d = xi.dim();
    std::vector<double> ws(xi.steps() * d);
    for (std::size_t k = 0; k < xi.steps(); ++k)
        for (std::size_t j = 0; j < d; ++j)
            ws[k * d + j] = xi.increment(k)[j] + lambda_series[k * d + j] * xi.grid().dt;
    return {innovations(path, vhat_series), Path(xi.grid(), d, std::move(ws))};
}

}  // namespace kernelflow
