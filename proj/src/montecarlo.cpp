#include "oam/montecarlo.hpp"

#include <cmath>
#include <vector>

namespace oam {

MonteCarloStats monte_carlo(
    std::span<const double> counts,
    const std::function<Eigen::VectorXd(std::span<const double>)>& analysis,
    int replicates, RngStream rng) {
    if (replicates < 2) throw DomainError("monte_carlo: need at least 2 replicates");

    std::vector<double> redrawn(counts.size());
    Eigen::VectorXd sum, sumsq;
    int used = 0, dropped = 0;
    for (int rep = 0; rep < replicates; ++rep) {
        RngStream stream = rng.substream(static_cast<std::uint64_t>(rep));
        for (size_t i = 0; i < counts.size(); ++i)
            redrawn[i] = static_cast<double>(stream.poisson(counts[i]));
        Eigen::VectorXd out;
        try {
            out = analysis(redrawn);
        } catch (const Error&) {
            ++dropped;
            continue;
        }
        if (used == 0) {
            sum = Eigen::VectorXd::Zero(out.size());
            sumsq = Eigen::VectorXd::Zero(out.size());
        } else if (out.size() != sum.size()) {
            throw DomainError("monte_carlo: analysis output size changed between replicates");
        }
        sum += out;
        sumsq += out.cwiseProduct(out);
        ++used;
    }
    if (dropped * 10 > replicates)
        throw Error("monte_carlo: more than 10% of replicates failed (" +
                    std::to_string(dropped) + "/" + std::to_string(replicates) + ")");

    MonteCarloStats stats;
    stats.replicates_used = used;
    stats.dropped = dropped;
    stats.mean = sum / static_cast<double>(used);
    stats.stddev = Eigen::VectorXd::Zero(sum.size());
    if (used > 1) {
        const Eigen::VectorXd var =
            (sumsq - sum.cwiseProduct(sum) / static_cast<double>(used)) /
            static_cast<double>(used - 1);
        stats.stddev = var.cwiseMax(0.0).cwiseSqrt();
    }
    return stats;
}

}  // namespace oam
