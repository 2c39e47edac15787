#ifndef OAM_MONTECARLO_HPP
#define OAM_MONTECARLO_HPP

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "oam/rng.hpp"

namespace oam {

struct MonteCarloStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
    int replicates_used = 0;
    int dropped = 0;
};

// Poisson error propagation: every replicate redraws each observed count as
// Poisson(count) and re-runs the analysis. Returns per-component sample mean
// and standard deviation. Replicates whose analysis throws are dropped; more
// than 10% drops is an error.
MonteCarloStats monte_carlo(
    std::span<const double> counts,
    const std::function<Eigen::VectorXd(std::span<const double>)>& analysis,
    int replicates, RngStream rng);

}  // namespace oam

#endif
