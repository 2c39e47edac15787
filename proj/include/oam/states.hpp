#ifndef OAM_STATES_HPP
#define OAM_STATES_HPP

#include <complex>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "oam/errors.hpp"

namespace oam {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

constexpr double kNormTol = 1e-9;
constexpr double kHermTol = 1e-9;
constexpr double kTraceTol = 1e-9;
constexpr double kEigenFloor = -1e-8;

// Normalized state vector. Construction checks the norm; `normalized` rescales
// instead of throwing.
class PureState {
  public:
    explicit PureState(Vector amplitudes);
    static PureState normalized(Vector amplitudes);

    int dim() const { return static_cast<int>(amps_.size()); }
    const Vector& amplitudes() const { return amps_; }
    Complex amplitude(int i) const { return amps_(i); }

  private:
    struct Unchecked {};
    PureState(Vector amplitudes, Unchecked) : amps_(std::move(amplitudes)) {}
    Vector amps_;
};

// Hermitian, unit-trace, positive-semidefinite matrix (within tolerances).
// Construction verifies all three invariants.
class DensityMatrix {
  public:
    explicit DensityMatrix(Matrix entries);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Matrix& entries() const { return mat_; }

  private:
    Matrix mat_;
};

// |psi><psi|.
DensityMatrix density_from_pure(const PureState& psi);

// Hermitian square root of a PSD matrix. Eigenvalues in [kEigenFloor, 0) are
// clamped to zero; anything below the floor or a non-Hermitian input throws.
Matrix matrix_sqrt_psd(const Matrix& h);

// Uhlmann fidelity, computed as (sum of singular values of sqrt(rho)*sqrt(sigma))^2.
double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Nearest (Frobenius) PSD unit-trace matrix to a Hermitian input: iteratively
// zero the most negative eigenvalue and spread the trace deficit uniformly over
// the remaining nonzero ones.
DensityMatrix project_to_physical(const Matrix& h);

Matrix kron_product(const Matrix& a, const Matrix& b);
Vector kron_product(const Vector& a, const Vector& b);

// JSON form {dim, re, im} with row-major coefficient lists. Loading re-checks
// the DensityMatrix invariants.
nlohmann::json density_to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const nlohmann::json& j);

}  // namespace oam

#endif
