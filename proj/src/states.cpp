#include "oam/states.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace oam {

namespace {

void require_square(const Matrix& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw DomainError(std::string(who) + ": matrix must be square and non-empty");
}

void require_hermitian(const Matrix& m, const char* who, double tol = kHermTol) {
    require_square(m, who);
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > tol)
        throw DomainError(std::string(who) + ": matrix is not Hermitian (deviation " +
                          std::to_string(dev) + ")");
}

}  // namespace

PureState::PureState(Vector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() == 0) throw DomainError("PureState: empty amplitude vector");
    const double n2 = amps_.squaredNorm();
    if (std::abs(n2 - 1.0) > kNormTol)
        throw DomainError("PureState: amplitudes are not normalized (|psi|^2 = " +
                          std::to_string(n2) + ")");
}

PureState PureState::normalized(Vector amplitudes) {
    const double n = amplitudes.norm();
    if (n == 0.0) throw DomainError("PureState: cannot normalize the zero vector");
    return PureState(std::move(amplitudes /= n), Unchecked{});
}

DensityMatrix::DensityMatrix(Matrix entries) : mat_(std::move(entries)) {
    require_hermitian(mat_, "DensityMatrix");
    const double tr = mat_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol)
        throw DomainError("DensityMatrix: trace is " + std::to_string(tr) + ", expected 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kEigenFloor)
        throw DomainError("DensityMatrix: negative eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()));
}

DensityMatrix density_from_pure(const PureState& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

Matrix matrix_sqrt_psd(const Matrix& h) {
    require_hermitian(h, "matrix_sqrt_psd");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Eigen::VectorXd lam = es.eigenvalues();
    // Eigenvalues that are zero up to solver noise must not survive into the
    // square root: sqrt(1e-16) = 1e-8 would pollute downstream fidelities.
    const double noise_floor = std::max(lam.maxCoeff(), 0.0) * 1e-13;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < kEigenFloor)
            throw DomainError("matrix_sqrt_psd: eigenvalue " + std::to_string(lam(i)) +
                              " below PSD floor");
        lam(i) = lam(i) <= noise_floor ? 0.0 : std::sqrt(lam(i));
    }
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim())
        throw DomainError("uhlmann_fidelity: dimension mismatch");
    const Matrix product = matrix_sqrt_psd(rho.entries()) * matrix_sqrt_psd(sigma.entries());
    const double root_sum =
        Eigen::JacobiSVD<Matrix>(product).singularValues().sum();
    return std::min(root_sum * root_sum, 1.0);
}

DensityMatrix project_to_physical(const Matrix& h) {
    require_hermitian(h, "project_to_physical");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::Index n = lam.size();
    for (int pass = 0; pass <= n; ++pass) {
        Eigen::Index most_negative = -1;
        double minval = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (lam(i) < minval) { minval = lam(i); most_negative = i; }
        if (most_negative >= 0) lam(most_negative) = 0.0;
        double deficit = lam.sum() - 1.0;
        int live = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (lam(i) > 0.0) ++live;
        if (live == 0) {
            // Everything truncated away: fall back to the maximally mixed state.
            lam.setConstant(1.0 / static_cast<double>(n));
            break;
        }
        if (deficit != 0.0)
            for (Eigen::Index i = 0; i < n; ++i)
                if (lam(i) > 0.0) lam(i) -= deficit / live;
        if (lam.minCoeff() >= 0.0) break;
    }
    Matrix out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    return DensityMatrix(0.5 * (out + out.adjoint()));
}

Matrix kron_product(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vector kron_product(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

nlohmann::json density_to_json(const DensityMatrix& rho) {
    const int n = rho.dim();
    std::vector<double> re, im;
    re.reserve(n * n);
    im.reserve(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            re.push_back(rho.entries()(i, j).real());
            im.push_back(rho.entries()(i, j).imag());
        }
    return nlohmann::json{{"dim", n}, {"re", re}, {"im", im}};
}

DensityMatrix density_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im"))
        throw ValidationError("density matrix JSON: expected object with dim/re/im");
    const int n = j.at("dim").get<int>();
    if (n <= 0) throw ValidationError("density matrix JSON: dim must be positive");
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != static_cast<size_t>(n) * n || im.size() != re.size())
        throw ValidationError("density matrix JSON: re/im must hold dim^2 entries");
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            m(i, k) = Complex(re[i * n + k], im[i * n + k]);
    try {
        return DensityMatrix(std::move(m));
    } catch (const DomainError& e) {
        throw ValidationError(std::string("density matrix JSON: ") + e.what());
    }
}

}  // namespace oam
