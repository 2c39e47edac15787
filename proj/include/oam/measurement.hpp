#ifndef OAM_MEASUREMENT_HPP
#define OAM_MEASUREMENT_HPP

#include <string>
#include <vector>

#include "oam/modes.hpp"
#include "oam/rng.hpp"
#include "oam/source.hpp"
#include "oam/states.hpp"

namespace oam {

// One coincidence-measurement configuration: a projector per arm.
struct Setting {
    PureState projector_a;
    PureState projector_b;
    std::string label_a;
    std::string label_b;
};

struct CoincidenceRow {
    std::string setting_a;
    std::string setting_b;
    std::int64_t counts = 0;
    double seconds = 1.0;
};

// CSV form: header `setting_a,setting_b,counts,seconds`. Labels follow the
// conventions "m=-3" (mode projectors), "t4" (tomography state, 1-based) and
// "pair=2,-1;basis=x;out=+" (subspace measurements).
struct CoincidenceTable {
    std::vector<CoincidenceRow> rows;
};

void write_coincidence_csv(const std::string& path, const CoincidenceTable& table);
CoincidenceTable read_coincidence_csv(const std::string& path);

// Tr[rho (|a><a| x |b><b|)]
double born_probability(const DensityMatrix& rho, const Setting& s);

// Poisson variate; deterministic for a fixed stream.
std::int64_t sample_counts(double mean, RngStream& rng);

// The two-memory state the config describes: spiral spectrum, optional storage,
// then white noise. `stored` requires storage_lorentzian.
DensityMatrix model_state(const ExperimentConfig& config, bool stored);

// Detected pair rate. After storage the input rate is scaled by the overall
// survival probability sum_m c_m^2 eta_m (post-selected ensemble).
double effective_pair_rate(const ExperimentConfig& config, bool stored);

// Setting builders.
std::vector<Setting> mode_settings(const ModeRange& range);
// 81 product settings of the nine qutrit states, embedded at modes -1, 0, +1.
std::vector<Setting> tomo_settings(const ModeRange& range);
// 12 settings (3 bases x 4 outcome pairs) per unordered mode pair.
std::vector<Setting> mub_settings(const std::vector<int>& modes, const ModeRange& range);

// Expected counts = (rate * born + floor_rate) * seconds, then Poisson sampled
// with one stream per setting.
CoincidenceTable simulate_table(const DensityMatrix& rho,
                                const std::vector<Setting>& settings, double pair_rate,
                                double seconds, double floor_rate, std::uint64_t seed);

// Mode-correlation matrix over settings (|m>, |m'>).
CoincidenceTable simulate_coincidence_matrix(const ExperimentConfig& config, bool stored);

// --- visibilities -----------------------------------------------------------

// Four coincidence counts of one basis: outcomes (+,+), (+,-), (-,+), (-,-).
// Stored as reals so exact Born probabilities can stand in for counts.
struct BasisCounts {
    double pp = 0, pm = 0, mp = 0, mm = 0;
    double total() const { return pp + pm + mp + mm; }
};

struct PairCounts {
    int m = 0, n = 0;
    BasisCounts x, y, z;
    double seconds = 1.0;
};

struct Visibilities {
    int m = 0, n = 0;
    double vx = 0, vy = 0, vz = 0;
    double sigma_vx = 0, sigma_vy = 0, sigma_vz = 0;
};

struct UndefinedVisibilityError : DomainError {
    using DomainError::DomainError;
};

// |C++ + C-- - C+- - C-+| / total; zero total throws UndefinedVisibilityError.
double visibility(const BasisCounts& counts);

Visibilities visibilities_from_counts(const PairCounts& counts);
// Same, with Poisson Monte Carlo standard deviations over the 12 raw counts.
Visibilities visibilities_from_counts(const PairCounts& counts, int mc_replicates,
                                      RngStream rng);

// Exact-probability counts for one pair from a state (no sampling, seconds = 1).
PairCounts exact_pair_counts(const DensityMatrix& rho, int m, int n,
                             const ModeRange& range);

}  // namespace oam

#endif
