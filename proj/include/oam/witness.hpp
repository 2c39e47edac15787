#ifndef OAM_WITNESS_HPP
#define OAM_WITNESS_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "oam/measurement.hpp"

namespace oam {

// Certification conventions for the dimensionality witness. "claims" reports
// the d whose bound was violated; "prose" reports d + 1 (the two readings of
// the bound statement).
enum class Convention { claims, prose };

Convention convention_from_string(const std::string& s);
std::string to_string(Convention c);

// Entanglement-witness bound (d - 1)^2; exceeding it certifies d dimensions.
double bound_M(int d);
// Dimensionality-witness bound 3 D(D-1)/2 - D(D-d) for D measured modes.
double bound_W(int big_d, int d);

struct IncompleteDataError : DomainError {
    IncompleteDataError(const std::string& msg, std::vector<std::pair<int, int>> pairs)
        : DomainError(msg), missing(std::move(pairs)) {}
    std::vector<std::pair<int, int>> missing;
};

// Raw subspace counts per unordered mode pair.
struct WitnessData {
    std::vector<PairCounts> pairs;

    const PairCounts* find(int m, int n) const;
};

WitnessData witness_data_from_table(const CoincidenceTable& table);

struct ValueWithSigma {
    double value = 0.0;
    double sigma = 0.0;
};

// M = sum over pairs of (V_x + V_y); sigma from Poisson Monte Carlo over the
// raw counts (mc_replicates = 0 skips the Monte Carlo, sigma = 0).
ValueWithSigma compute_M(const WitnessData& data, const std::vector<int>& mode_set,
                         int mc_replicates, RngStream rng);
// W = sum over pairs of (V_x + V_y + V_z).
ValueWithSigma compute_W(const WitnessData& data, const std::vector<int>& mode_set,
                         int mc_replicates, RngStream rng);

struct SchmidtCheck {
    bool pass = false;
    double margin = 0.0;  // F - 2/3
};

// Strict threshold F > 2/3 for Schmidt rank >= 3.
SchmidtCheck schmidt_threshold_check(double fidelity);

// Largest d in [2, D] whose bound is exceeded by more than k_sigma * sigma_w
// (strict), mapped through the convention; 1 when nothing is violated.
int certify_dimension(double w, double sigma_w, int big_d, double k_sigma,
                      Convention convention);

struct WitnessViolation {
    double excess = 0.0;        // W - bound
    double significance = 0.0;  // excess / sigma_W (0 when sigma_W == 0)
};

struct WitnessReport {
    std::vector<int> mode_set;
    int big_d = 0;
    std::vector<Visibilities> pair_visibilities;
    ValueWithSigma m;  // entanglement witness over all pairs of the mode set
    ValueWithSigma w;  // dimensionality witness
    std::map<int, double> bounds_m;
    std::map<int, double> bounds_w;
    std::map<int, WitnessViolation> violations_w;
    int certified_dimension = 1;        // under `convention`
    int certified_dimension_claims = 1;
    int certified_dimension_prose = 1;
    int certified_dimension_m = 1;      // from M against (d-1)^2
    double k_sigma = 3.0;
    Convention convention = Convention::claims;
};

WitnessReport build_witness_report(const WitnessData& data,
                                   const std::vector<int>& mode_set, double k_sigma,
                                   Convention convention, int mc_replicates,
                                   std::uint64_t seed);

nlohmann::json witness_report_to_json(const WitnessReport& report);
std::string witness_report_text(const WitnessReport& report);

}  // namespace oam

#endif
