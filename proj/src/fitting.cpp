#include "oam/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace oam {

namespace {

using Params = Eigen::Vector4d;  // (y0, xc, w, A)

double model(double x, const Params& p) {
    const double dx = x - p(1);
    return p(0) + (2.0 * p(3) / std::numbers::pi) * p(2) / (4.0 * dx * dx + p(2) * p(2));
}

Eigen::Vector4d jacobian_row(double x, const Params& p) {
    const double dx = x - p(1);
    const double w = p(2);
    const double q = 4.0 * dx * dx + w * w;
    const double c = 2.0 / std::numbers::pi;
    Eigen::Vector4d j;
    j(0) = 1.0;
    j(1) = c * p(3) * w * 8.0 * dx / (q * q);
    j(2) = c * p(3) * (4.0 * dx * dx - w * w) / (q * q);
    j(3) = c * w / q;
    return j;
}

double cost(std::span<const double> xs, std::span<const double> ys,
            std::span<const double> ws, const Params& p) {
    double s = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - model(xs[i], p);
        s += (ws.empty() ? 1.0 : ws[i]) * r * r;
    }
    return s;
}

LorentzianParams heuristic_init(std::span<const double> xs, std::span<const double> ys) {
    LorentzianParams p;
    p.y0 = *std::min_element(ys.begin(), ys.end());
    const size_t peak = std::distance(ys.begin(), std::max_element(ys.begin(), ys.end()));
    p.xc = xs[peak];
    double w = 1.0;
    try {
        w = hwhm_width(xs, ys);
    } catch (const NoPeakError&) {
        const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
        w = std::max((*hi - *lo) / 4.0, 1e-3);
    }
    p.w = std::max(w, 1e-6);
    p.a = std::max(ys[peak] - p.y0, 1e-12) * std::numbers::pi * p.w / 2.0;
    return p;
}

}  // namespace

FitResult fit_lorentzian(std::span<const double> xs, std::span<const double> ys,
                         std::span<const double> weights,
                         std::optional<LorentzianParams> init) {
    if (xs.size() != ys.size())
        throw DomainError("fit_lorentzian: xs and ys differ in length");
    if (!weights.empty() && weights.size() != xs.size())
        throw DomainError("fit_lorentzian: weights length mismatch");
    const size_t n = xs.size();
    if (n < 5)
        throw DomainError("fit_lorentzian: underdetermined, need at least 5 points for 4 parameters");

    const LorentzianParams p0 = init ? *init : heuristic_init(xs, ys);
    if (!(p0.w > 0.0)) throw DomainError("fit_lorentzian: init.w must be positive");
    Params p(p0.y0, p0.xc, p0.w, p0.a);

    double lambda = 1e-3;
    double current = cost(xs, ys, weights, p);
    int it = 0;
    bool converged = false;
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    for (it = 1; it <= 500; ++it) {
        jtj.setZero();
        Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
        for (size_t i = 0; i < n; ++i) {
            const double wi = weights.empty() ? 1.0 : weights[i];
            const Eigen::Vector4d ji = jacobian_row(xs[i], p);
            const double ri = ys[i] - model(xs[i], p);
            jtj += wi * ji * ji.transpose();
            jtr += wi * ji * ri;
        }
        bool stepped = false;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::Matrix4d damped = jtj;
            for (int k = 0; k < 4; ++k)
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-30);
            const Eigen::Vector4d delta = damped.ldlt().solve(jtr);
            Params cand = p + delta;
            if (std::abs(cand(2)) < 1e-12) cand(2) = 1e-12;  // keep w away from the pole
            const double cand_cost = cost(xs, ys, weights, cand);
            if (std::isfinite(cand_cost) && cand_cost <= current) {
                const double drop = current - cand_cost;
                p = cand;
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                if (drop <= 1e-12 * std::max(current, 1e-300)) converged = true;
                current = cand_cost;
                break;
            }
            lambda *= 4.0;
        }
        if (!stepped || converged) {
            converged = converged || !stepped;  // stuck at a minimum counts as converged
            break;
        }
    }

    // Fold the (w, A) -> (-w, -A) symmetry so the returned width is positive.
    if (p(2) < 0.0) {
        p(2) = -p(2);
        p(3) = -p(3);
    }

    FitResult result;
    result.params = LorentzianParams{p(0), p(1), p(2), p(3)};
    result.iterations = it;
    result.converged = converged;
    const double dof = static_cast<double>(n) - 4.0;
    result.residual_rms = std::sqrt(current / static_cast<double>(n));

    // Identifiability at the optimum. A vanishing fitted peak (A ~ 0, e.g. on
    // constant data) leaves xc and w free, which is a rank deficiency of the
    // Jacobian in those columns.
    const auto [min_y, max_y] = std::minmax_element(ys.begin(), ys.end());
    const double y_scale = std::max({*max_y - *min_y, std::abs(*max_y), 1e-300});
    const double peak = std::abs(2.0 * p(3) / (std::numbers::pi * p(2)));
    if (peak <= 1e-9 * y_scale)
        throw DegenerateFitError(
            "fit_lorentzian: fitted peak vanishes, width and center are unidentifiable",
            result);

    jtj.setZero();
    for (size_t i = 0; i < n; ++i) {
        const double wi = weights.empty() ? 1.0 : weights[i];
        const Eigen::Vector4d ji = jacobian_row(xs[i], p);
        jtj += wi * ji * ji.transpose();
    }
    // Column-equilibrated rank test: insensitive to the wildly different
    // natural scales of (y0, xc, w, A).
    Eigen::Vector4d col_scale;
    for (int k = 0; k < 4; ++k) {
        col_scale(k) = std::sqrt(jtj(k, k));
        if (!(col_scale(k) > 0.0))
            throw DegenerateFitError(
                "fit_lorentzian: Jacobian rank-deficient at optimum (degenerate fit)",
                result);
    }
    Eigen::Matrix4d equilibrated;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            equilibrated(i, j) = jtj(i, j) / (col_scale(i) * col_scale(j));
    const Eigen::JacobiSVD<Eigen::Matrix4d> svd(equilibrated,
                                                Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(3) <= 1e-12 * svd.singularValues()(0))
        throw DegenerateFitError(
            "fit_lorentzian: Jacobian rank-deficient at optimum (degenerate fit)", result);

    const double s2 = dof > 0 ? current / dof : 0.0;
    Eigen::Vector4d sv_inv;
    for (int k = 0; k < 4; ++k) sv_inv(k) = 1.0 / svd.singularValues()(k);
    const Eigen::Matrix4d inv_eq =
        svd.matrixV() * sv_inv.asDiagonal() * svd.matrixU().transpose();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            result.covariance(i, j) = s2 * inv_eq(i, j) / (col_scale(i) * col_scale(j));
    return result;
}

double hwhm_width(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw DomainError("hwhm_width: need at least 3 samples");
    // assume xs ascending
    for (size_t i = 1; i < xs.size(); ++i)
        if (xs[i] <= xs[i - 1]) throw DomainError("hwhm_width: xs must be strictly ascending");

    const double baseline = *std::min_element(ys.begin(), ys.end());
    const size_t peak =
        std::distance(ys.begin(), std::max_element(ys.begin(), ys.end()));
    const double height = ys[peak] - baseline;
    if (height <= 0.0) throw NoPeakError("hwhm_width: curve is flat");
    if (peak == 0 || peak == ys.size() - 1)
        throw NoPeakError("hwhm_width: maximum sits on the boundary (monotone curve)");
    const double half = baseline + height / 2.0;

    size_t above = 0;
    for (double y : ys)
        if (y > half) ++above;
    if (above < 2)
        throw NoPeakError("hwhm_width: fewer than two samples above half height");

    // walk outwards from the peak to the half-height crossings
    double left = xs.front();
    bool found_left = false;
    for (size_t i = peak; i-- > 0;) {
        if (ys[i] <= half) {
            const double t = (half - ys[i]) / (ys[i + 1] - ys[i]);
            left = xs[i] + t * (xs[i + 1] - xs[i]);
            found_left = true;
            break;
        }
    }
    double right = xs.back();
    bool found_right = false;
    for (size_t i = peak + 1; i < ys.size(); ++i) {
        if (ys[i] <= half) {
            const double t = (ys[i - 1] - half) / (ys[i - 1] - ys[i]);
            right = xs[i - 1] + t * (xs[i] - xs[i - 1]);
            found_right = true;
            break;
        }
    }
    if (!found_left || !found_right)
        throw NoPeakError("hwhm_width: curve does not drop to half height on both sides");
    return right - left;
}

double hwhm_width(const SpiralSpectrum& spectrum) {
    std::vector<double> xs, ys;
    for (int i = 0; i < spectrum.range.size(); ++i) {
        xs.push_back(spectrum.range.mode_at(i));
        const double c = spectrum.coefficients(i);
        ys.push_back(c * c);
    }
    return hwhm_width(xs, ys);
}

std::vector<double> poisson_weights(std::span<const double> ys) {
    std::vector<double> w(ys.size());
    for (size_t i = 0; i < ys.size(); ++i) w[i] = 1.0 / std::max(ys[i], 1.0);
    return w;
}

nlohmann::json fit_result_to_json(const FitResult& r) {
    std::vector<double> cov;
    cov.reserve(16);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) cov.push_back(r.covariance(i, j));
    return nlohmann::json{
        {"params", {{"y0", r.params.y0}, {"xc", r.params.xc}, {"w", r.params.w}, {"A", r.params.a}}},
        {"residual_rms", r.residual_rms},
        {"covariance", cov},
        {"covariance_order", {"y0", "xc", "w", "A"}},
        {"converged", r.converged},
        {"iterations", r.iterations}};
}

}  // namespace oam
