#ifndef OAM_FITTING_HPP
#define OAM_FITTING_HPP

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "oam/source.hpp"

namespace oam {

struct FitResult {
    LorentzianParams params;
    double residual_rms = 0.0;
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  // order (y0, xc, w, A)
    bool converged = false;
    int iterations = 0;
};

// Curve has no usable peak (flat, monotone, or a single sample above half height).
struct NoPeakError : DomainError {
    using DomainError::DomainError;
};

// Jacobian rank-deficient at the optimum (e.g. constant data, A ~ 0). Carries
// the best iterate found.
struct DegenerateFitError : DomainError {
    DegenerateFitError(const std::string& msg, FitResult partial_result)
        : DomainError(msg), partial(std::move(partial_result)) {}
    FitResult partial;
};

// Damped Gauss-Newton (Levenberg-Marquardt) least squares for the Lorentzian
// form. Weights multiply squared residuals; empty weights means unweighted.
// Convergence: relative cost change < 1e-12 or 500 iterations. The returned w
// is always positive (the (w, A) -> (-w, -A) symmetry is folded).
FitResult fit_lorentzian(std::span<const double> xs, std::span<const double> ys,
                         std::span<const double> weights = {},
                         std::optional<LorentzianParams> init = std::nullopt);

// Full width at half maximum above baseline (baseline = min sample), linearly
// interpolated between samples. This is the quantity the Lorentzian's w
// parameter measures: y(xc +- w/2) - y0 = (y(xc) - y0)/2.
double hwhm_width(std::span<const double> xs, std::span<const double> ys);
double hwhm_width(const SpiralSpectrum& spectrum);  // on |c_m|^2 over integer m

// Poisson-motivated weights 1/max(y, 1) for count data.
std::vector<double> poisson_weights(std::span<const double> ys);

nlohmann::json fit_result_to_json(const FitResult& r);

}  // namespace oam

#endif
