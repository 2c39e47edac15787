#ifndef OAM_TOMOGRAPHY_HPP
#define OAM_TOMOGRAPHY_HPP

#include <array>
#include <string>

#include "oam/measurement.hpp"
#include "oam/montecarlo.hpp"
#include "oam/states.hpp"

namespace oam {

// Coincidence counts over the 81 product settings of the nine tomography
// states, counts(j, k) for state j on arm A and k on arm B (0-based here,
// 1-based in the CSV form `j,k,counts`).
struct TomoDataset {
    Eigen::Matrix<std::int64_t, 9, 9> counts = Eigen::Matrix<std::int64_t, 9, 9>::Zero();
    double seconds = 1.0;

    std::int64_t total() const { return counts.sum(); }
};

void write_tomo_csv(const std::string& path, const TomoDataset& data);
TomoDataset read_tomo_csv(const std::string& path);
// Accepts a coincidence table with labels t1..t9 on both arms.
TomoDataset tomo_dataset_from_table(const CoincidenceTable& table);

// (|LL> + |GG> + |RR>)/sqrt(3) over the product basis of (L, G, R).
PureState ideal_qutrit_pair();

// p_jk = Tr[rho (P_j x P_k)], row-major over (j, k).
std::array<double, 81> forward_probabilities(const DensityMatrix& rho);

// Least-squares solution of Tr[X Pi_jk] = counts_jk over Hermitian X with the
// overall rate absorbed into the trace, which is then fixed to 1. The result
// may fail the PSD invariant; follow with project_to_physical if needed.
Matrix linear_inversion(const TomoDataset& data);

struct ReconstructionResult {
    DensityMatrix rho;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct MleOptions {
    double tolerance = 1e-10;  // on the change of the update operator's top eigenvalue
    int max_iterations = 10000;
    const DensityMatrix* warm_start = nullptr;
    std::vector<double>* ll_trace = nullptr;  // accepted log-likelihood per iteration
};

// Iterative maximum-likelihood reconstruction (multiplicative R rho R update
// with diluted steps when the likelihood would decrease). The non-complete
// projector set is handled by working in the frame where sum_jk Pi_jk = I.
ReconstructionResult mle_reconstruct(const TomoDataset& data, const MleOptions& opts = {});

}  // namespace oam

#endif
