#ifndef OAM_SOURCE_HPP
#define OAM_SOURCE_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "oam/modes.hpp"
#include "oam/states.hpp"

namespace oam {

// y = y0 + (2A/pi) * w / (4(x - xc)^2 + w^2)
struct LorentzianParams {
    double y0 = 0.0;
    double xc = 0.0;
    double w = 1.0;   // the half-width-at-half-maximum parameter of the form above
    double a = 0.0;   // area
};

void validate(const LorentzianParams& p);
double lorentzian_eval(double x, const LorentzianParams& p);

// Real non-negative mode amplitudes c_m with sum c_m^2 = 1.
struct SpiralSpectrum {
    ModeRange range;
    Eigen::VectorXd coefficients;

    double at(int m) const { return coefficients(range.index(m)); }
};

// c_m proportional to sqrt(max(lorentzian(m), 0)); coincidence counts scale with
// |c_m|^2, so amplitudes are square roots of the fitted curve.
SpiralSpectrum build_spiral_spectrum(const LorentzianParams& p, const ModeRange& range);

// Per-mode storage efficiencies in [0, 1].
struct StorageProfile {
    ModeRange range;
    Eigen::VectorXd efficiencies;

    double at(int m) const { return efficiencies(range.index(m)); }
};

StorageProfile storage_profile_from_lorentzian(const LorentzianParams& p,
                                               const ModeRange& range);
StorageProfile uniform_storage_profile(double eta, const ModeRange& range);

struct NoiseParams {
    double epsilon = 0.0;     // white-noise mixing weight in [0, 1]
    double floor_rate = 0.0;  // accidental coincidences per setting per second
};

void validate(const NoiseParams& p);

// Sum_m c_m |m>|m> over the product basis (index = i_a * n + i_b).
PureState joint_state(const SpiralSpectrum& spectrum);

// Post-storage amplitudes o_m = c_m sqrt(eta_m), renormalized (post-selection).
SpiralSpectrum apply_storage(const PureState& joint, const StorageProfile& profile);
SpiralSpectrum apply_storage(const SpiralSpectrum& spectrum, const StorageProfile& profile);

// (1 - eps) rho + eps I/dim.
DensityMatrix apply_noise(const DensityMatrix& rho, const NoiseParams& noise);

// Everything a simulation run needs. JSON schema:
// {mode_min, mode_max, source_lorentzian: {y0,xc,w,A},
//  storage_lorentzian: {y0,xc,w,A} | null, epsilon, floor_rate, pair_rate,
//  acquisition_seconds, seed}
struct ExperimentConfig {
    int mode_min = -7;
    int mode_max = 7;
    LorentzianParams source_lorentzian;
    std::optional<LorentzianParams> storage_lorentzian;
    double epsilon = 0.0;
    double floor_rate = 0.0;
    double pair_rate = 0.0;            // detected pairs per second (before storage)
    double acquisition_seconds = 1.0;  // per setting
    std::uint64_t seed = 0;
    bool seed_given = false;

    ModeRange range() const { return ModeRange{mode_min, mode_max}; }
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

}  // namespace oam

#endif
