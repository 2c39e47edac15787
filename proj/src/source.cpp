#include "oam/source.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace oam {

void validate(const LorentzianParams& p) {
    if (!(p.w > 0.0)) throw DomainError("LorentzianParams: w must be positive");
    if (p.a < 0.0) throw DomainError("LorentzianParams: A must be non-negative");
}

double lorentzian_eval(double x, const LorentzianParams& p) {
    validate(p);
    const double dx = x - p.xc;
    return p.y0 + (2.0 * p.a / std::numbers::pi) * p.w / (4.0 * dx * dx + p.w * p.w);
}

SpiralSpectrum build_spiral_spectrum(const LorentzianParams& p, const ModeRange& range) {
    Eigen::VectorXd c(range.size());
    for (int i = 0; i < range.size(); ++i)
        c(i) = std::sqrt(std::max(lorentzian_eval(range.mode_at(i), p), 0.0));
    const double norm = c.norm();
    if (norm == 0.0)
        throw DomainError("build_spiral_spectrum: spectrum vanishes on the whole range");
    return SpiralSpectrum{range, c / norm};
}

StorageProfile storage_profile_from_lorentzian(const LorentzianParams& p,
                                               const ModeRange& range) {
    Eigen::VectorXd eta(range.size());
    for (int i = 0; i < range.size(); ++i)
        eta(i) = std::clamp(lorentzian_eval(range.mode_at(i), p), 0.0, 1.0);
    return StorageProfile{range, std::move(eta)};
}

StorageProfile uniform_storage_profile(double eta, const ModeRange& range) {
    if (eta < 0.0 || eta > 1.0)
        throw DomainError("uniform_storage_profile: efficiency must be in [0, 1]");
    return StorageProfile{range, Eigen::VectorXd::Constant(range.size(), eta)};
}

void validate(const NoiseParams& p) {
    if (p.epsilon < 0.0 || p.epsilon > 1.0)
        throw DomainError("NoiseParams: epsilon must be in [0, 1]");
    if (p.floor_rate < 0.0)
        throw DomainError("NoiseParams: floor_rate must be non-negative");
}

PureState joint_state(const SpiralSpectrum& spectrum) {
    const int n = spectrum.range.size();
    Vector v = Vector::Zero(static_cast<Eigen::Index>(n) * n);
    for (int i = 0; i < n; ++i) v(i * n + i) = spectrum.coefficients(i);
    return PureState(std::move(v));
}

SpiralSpectrum apply_storage(const SpiralSpectrum& spectrum, const StorageProfile& profile) {
    if (spectrum.range.m_min != profile.range.m_min ||
        spectrum.range.m_max != profile.range.m_max)
        throw DomainError("apply_storage: spectrum and profile ranges differ");
    Eigen::VectorXd o =
        spectrum.coefficients.cwiseProduct(profile.efficiencies.cwiseSqrt());
    const double norm = o.norm();
    if (norm == 0.0)
        throw DomainError("apply_storage: no amplitude survives storage");
    return SpiralSpectrum{spectrum.range, o / norm};
}

SpiralSpectrum apply_storage(const PureState& joint, const StorageProfile& profile) {
    const int n = profile.range.size();
    if (joint.dim() != n * n)
        throw DomainError("apply_storage: state dimension does not match profile range");
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) {
        const Complex amp = joint.amplitude(i * n + i);
        if (std::abs(amp.imag()) > kNormTol)
            throw DomainError("apply_storage: state is not of diagonal joint form");
        c(i) = amp.real();
    }
    // Any off-diagonal weight means this is not a joint_state output.
    if (std::abs(c.squaredNorm() - 1.0) > 1e-6)
        throw DomainError("apply_storage: state is not of diagonal joint form");
    return apply_storage(SpiralSpectrum{profile.range, std::move(c)}, profile);
}

DensityMatrix apply_noise(const DensityMatrix& rho, const NoiseParams& noise) {
    validate(noise);
    const int n = rho.dim();
    Matrix mixed = (1.0 - noise.epsilon) * rho.entries() +
                   (noise.epsilon / n) * Matrix::Identity(n, n);
    return DensityMatrix(std::move(mixed));
}

namespace {

double require_number(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field) || !j.at(field).is_number())
        throw ValidationError("config: field '" + field + "' missing or not a number");
    return j.at(field).get<double>();
}

int require_int(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field) || !j.at(field).is_number_integer())
        throw ValidationError("config: field '" + field + "' missing or not an integer");
    return j.at(field).get<int>();
}

LorentzianParams lorentzian_from_json(const nlohmann::json& j, const std::string& field) {
    if (!j.is_object())
        throw ValidationError("config: field '" + field + "' must be an object");
    LorentzianParams p;
    p.y0 = require_number(j, "y0");
    p.xc = require_number(j, "xc");
    p.w = require_number(j, "w");
    p.a = require_number(j, "A");
    try {
        validate(p);
    } catch (const DomainError& e) {
        throw ValidationError("config: field '" + field + "': " + e.what());
    }
    return p;
}

nlohmann::json lorentzian_to_json(const LorentzianParams& p) {
    return {{"y0", p.y0}, {"xc", p.xc}, {"w", p.w}, {"A", p.a}};
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
    ExperimentConfig c;
    c.mode_min = require_int(j, "mode_min");
    c.mode_max = require_int(j, "mode_max");
    if (c.mode_min > c.mode_max)
        throw ValidationError("config: field 'mode_min' must not exceed 'mode_max'");
    if (!j.contains("source_lorentzian"))
        throw ValidationError("config: field 'source_lorentzian' is required");
    c.source_lorentzian = lorentzian_from_json(j.at("source_lorentzian"), "source_lorentzian");
    if (j.contains("storage_lorentzian") && !j.at("storage_lorentzian").is_null())
        c.storage_lorentzian =
            lorentzian_from_json(j.at("storage_lorentzian"), "storage_lorentzian");
    c.epsilon = require_number(j, "epsilon");
    if (c.epsilon < 0.0 || c.epsilon > 1.0)
        throw ValidationError("config: field 'epsilon' must be in [0, 1]");
    c.floor_rate = require_number(j, "floor_rate");
    if (c.floor_rate < 0.0)
        throw ValidationError("config: field 'floor_rate' must be non-negative");
    c.pair_rate = require_number(j, "pair_rate");
    if (c.pair_rate < 0.0)
        throw ValidationError("config: field 'pair_rate' must be non-negative");
    c.acquisition_seconds = require_number(j, "acquisition_seconds");
    if (c.acquisition_seconds <= 0.0)
        throw ValidationError("config: field 'acquisition_seconds' must be positive");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0)
            throw ValidationError("config: field 'seed' must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
        c.seed_given = true;
    }
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j{{"mode_min", c.mode_min},
                     {"mode_max", c.mode_max},
                     {"source_lorentzian", lorentzian_to_json(c.source_lorentzian)},
                     {"storage_lorentzian", nullptr},
                     {"epsilon", c.epsilon},
                     {"floor_rate", c.floor_rate},
                     {"pair_rate", c.pair_rate},
                     {"acquisition_seconds", c.acquisition_seconds},
                     {"seed", c.seed}};
    if (c.storage_lorentzian) j["storage_lorentzian"] = lorentzian_to_json(*c.storage_lorentzian);
    return j;
}

}  // namespace oam
