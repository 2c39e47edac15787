#include "oam/tomography.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace oam {

namespace {

constexpr double kProbFloor = 1e-15;

// Product vectors of the 81 settings and the frame transform that makes them a
// resolution of identity. Computed once.
struct TomoFrame {
    Eigen::Matrix<Complex, 9, Eigen::Dynamic> vectors;        // raw |psi_j x psi_k>
    Eigen::Matrix<Complex, 9, Eigen::Dynamic> tilde_vectors;  // G^{-1/2} applied
    Matrix g_half;       // G2^{+1/2}
    Matrix g_minus_half; // G2^{-1/2}

    static const TomoFrame& instance() {
        static const TomoFrame frame = [] {
            TomoFrame f;
            const auto states = qutrit_tomo_states();
            f.vectors.resize(9, 81);
            for (int j = 0; j < 9; ++j)
                for (int k = 0; k < 9; ++k)
                    f.vectors.col(j * 9 + k) =
                        kron_product(states[j].amplitudes(), states[k].amplitudes());
            Matrix g2 = Matrix::Zero(9, 9);
            for (int s = 0; s < 81; ++s)
                g2 += f.vectors.col(s) * f.vectors.col(s).adjoint();
            Eigen::SelfAdjointEigenSolver<Matrix> es(g2);
            const Eigen::VectorXd lam = es.eigenvalues();
            Eigen::VectorXd sqrt_lam(9), inv_sqrt_lam(9);
            for (int i = 0; i < 9; ++i) {
                sqrt_lam(i) = std::sqrt(lam(i));
                inv_sqrt_lam(i) = 1.0 / sqrt_lam(i);
            }
            f.g_half = es.eigenvectors() * sqrt_lam.asDiagonal() * es.eigenvectors().adjoint();
            f.g_minus_half =
                es.eigenvectors() * inv_sqrt_lam.asDiagonal() * es.eigenvectors().adjoint();
            f.tilde_vectors = f.g_minus_half * f.vectors;
            return f;
        }();
        return frame;
    }
};

Eigen::VectorXd tilde_probabilities(const Matrix& rho_tilde,
                                    const Eigen::Matrix<Complex, 9, Eigen::Dynamic>& v) {
    const Eigen::Matrix<Complex, 9, Eigen::Dynamic> m = rho_tilde * v;
    Eigen::VectorXd p(v.cols());
    for (Eigen::Index s = 0; s < v.cols(); ++s)
        p(s) = std::max(v.col(s).dot(m.col(s)).real(), kProbFloor);
    return p;
}

double log_likelihood(const Eigen::VectorXd& freq, const Eigen::VectorXd& probs) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < freq.size(); ++i)
        if (freq(i) > 0.0) ll += freq(i) * std::log(probs(i));
    return ll;
}

}  // namespace

void write_tomo_csv(const std::string& path, const TomoDataset& data) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "j,k,counts\n";
    for (int j = 0; j < 9; ++j)
        for (int k = 0; k < 9; ++k)
            out << (j + 1) << "," << (k + 1) << "," << data.counts(j, k) << "\n";
    if (!out) throw Error("write failed for " + path);
}

TomoDataset read_tomo_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "j,k,counts")
        throw ValidationError(path + ": expected header j,k,counts");
    TomoDataset data;
    Eigen::Matrix<int, 9, 9> seen = Eigen::Matrix<int, 9, 9>::Zero();
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int j = 0, k = 0;
        long long c = 0;
        char comma1 = 0, comma2 = 0;
        std::istringstream row(line);
        if (!(row >> j >> comma1 >> k >> comma2 >> c) || comma1 != ',' || comma2 != ',')
            throw ValidationError(path + ":" + std::to_string(lineno) + ": malformed row");
        if (j < 1 || j > 9 || k < 1 || k > 9)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": indices must be in 1..9");
        if (c < 0)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": negative counts");
        if (seen(j - 1, k - 1)++)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": duplicate cell");
        data.counts(j - 1, k - 1) = c;
    }
    if (seen.sum() != 81)
        throw ValidationError(path + ": expected all 81 cells of the 9x9 dataset");
    return data;
}

TomoDataset tomo_dataset_from_table(const CoincidenceTable& table) {
    TomoDataset data;
    Eigen::Matrix<int, 9, 9> seen = Eigen::Matrix<int, 9, 9>::Zero();
    auto parse = [](const std::string& label) {
        if (label.size() < 2 || label[0] != 't')
            throw ValidationError("coincidence table: label '" + label +
                                  "' is not a tomography setting");
        const int idx = std::stoi(label.substr(1));
        if (idx < 1 || idx > 9)
            throw ValidationError("coincidence table: tomography index out of range in '" +
                                  label + "'");
        return idx - 1;
    };
    double seconds = 0.0;
    for (const auto& row : table.rows) {
        const int j = parse(row.setting_a);
        const int k = parse(row.setting_b);
        if (seen(j, k)++)
            throw ValidationError("coincidence table: duplicate tomography setting");
        data.counts(j, k) = row.counts;
        seconds = row.seconds;
    }
    if (seen.sum() != 81)
        throw ValidationError("coincidence table: expected all 81 tomography settings");
    if (seconds > 0.0) data.seconds = seconds;
    return data;
}

PureState ideal_qutrit_pair() {
    Vector v = Vector::Zero(9);
    const double amp = 1.0 / std::sqrt(3.0);
    v(0) = amp;  // |LL>
    v(4) = amp;  // |GG>
    v(8) = amp;  // |RR>
    return PureState(std::move(v));
}

std::array<double, 81> forward_probabilities(const DensityMatrix& rho) {
    if (rho.dim() != 9)
        throw DomainError("forward_probabilities: expected a 9x9 two-qutrit state");
    const auto& frame = TomoFrame::instance();
    std::array<double, 81> p{};
    for (int s = 0; s < 81; ++s) {
        const auto v = frame.vectors.col(s);
        p[s] = std::max((v.dot(rho.entries() * v)).real(), 0.0);
    }
    return p;
}

Matrix linear_inversion(const TomoDataset& data) {
    if (data.total() <= 0)
        throw DomainError("linear_inversion: dataset has no counts");
    const auto& frame = TomoFrame::instance();
    // Row s of the design matrix encodes Tr[X Pi_s] as a linear form in the
    // row-major entries of X.
    Matrix design(81, 81);
    Eigen::VectorXcd rhs(81);
    for (int s = 0; s < 81; ++s) {
        const Matrix proj =
            frame.vectors.col(s) * frame.vectors.col(s).adjoint();
        for (int r = 0; r < 9; ++r)
            for (int c = 0; c < 9; ++c)
                design(s, r * 9 + c) = proj(c, r);  // Tr[X P] = sum X_rc P_cr
        rhs(s) = static_cast<double>(data.counts(s / 9, s % 9));
    }
    const Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < 81)
        throw Error("linear_inversion: design matrix is rank-deficient");
    const Eigen::VectorXcd x = qr.solve(rhs);
    Matrix rho(9, 9);
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) rho(r, c) = x(r * 9 + c);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-12)
        throw Error("linear_inversion: reconstructed matrix has vanishing trace");
    return rho / tr;
}

ReconstructionResult mle_reconstruct(const TomoDataset& data, const MleOptions& opts) {
    const std::int64_t total = data.total();
    if (total <= 0) throw DomainError("mle_reconstruct: dataset has no counts");
    const auto& frame = TomoFrame::instance();

    Eigen::VectorXd freq(81);
    for (int s = 0; s < 81; ++s)
        freq(s) = static_cast<double>(data.counts(s / 9, s % 9)) /
                  static_cast<double>(total);

    Matrix rho_tilde;
    if (opts.warm_start) {
        rho_tilde = frame.g_half * opts.warm_start->entries() * frame.g_half;
        rho_tilde /= rho_tilde.trace().real();
    } else {
        rho_tilde = Matrix::Identity(9, 9) / 9.0;
    }

    double ll = log_likelihood(freq, tilde_probabilities(rho_tilde, frame.tilde_vectors));
    if (opts.ll_trace) opts.ll_trace->push_back(ll);
    double prev_top = std::numeric_limits<double>::quiet_NaN();
    int it = 0;
    bool converged = false;
    while (it < opts.max_iterations) {
        ++it;
        const Eigen::VectorXd probs = tilde_probabilities(rho_tilde, frame.tilde_vectors);
        const Eigen::VectorXd ratio = freq.cwiseQuotient(probs);
        const Matrix update = frame.tilde_vectors * ratio.asDiagonal() *
                              frame.tilde_vectors.adjoint();

        const double top = Eigen::SelfAdjointEigenSolver<Matrix>(update, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .maxCoeff();
        if (!std::isnan(prev_top) && std::abs(top - prev_top) < opts.tolerance) {
            converged = true;
            break;
        }
        prev_top = top;

        Matrix cand = update * rho_tilde * update;
        cand = 0.5 * (cand + cand.adjoint()).eval();
        cand /= cand.trace().real();
        double cand_ll = log_likelihood(freq, tilde_probabilities(cand, frame.tilde_vectors));
        if (cand_ll < ll) {
            // diluted step: (I + eps R) rho (I + eps R), halving eps until the
            // likelihood no longer decreases
            double eps = 0.5;
            while (true) {
                const Matrix damped = Matrix::Identity(9, 9) + eps * update;
                cand = damped * rho_tilde * damped.adjoint();
                cand = 0.5 * (cand + cand.adjoint()).eval();
                cand /= cand.trace().real();
                cand_ll = log_likelihood(freq, tilde_probabilities(cand, frame.tilde_vectors));
                if (cand_ll >= ll || eps < 1e-14) break;
                eps *= 0.5;
            }
            if (cand_ll < ll) break;  // cannot improve: treat as converged below
        }
        rho_tilde = cand;
        ll = cand_ll;
        if (opts.ll_trace) opts.ll_trace->push_back(ll);
    }

    Matrix rho = frame.g_minus_half * rho_tilde * frame.g_minus_half;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();

    ReconstructionResult result{project_to_physical(rho),
                                static_cast<double>(total) * ll, it, converged};
    return result;
}

}  // namespace oam
