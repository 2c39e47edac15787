// Command-line frontend: simulate coincidence data, reconstruct states,
// compute witnesses, fit spectra, render phase masks. Every command writes a
// manifest next to its outputs so runs can be replayed and checked for
// byte-identical reproduction.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oam/fitting.hpp"
#include "oam/measurement.hpp"
#include "oam/modes.hpp"
#include "oam/rng.hpp"
#include "oam/source.hpp"
#include "oam/tomography.hpp"
#include "oam/witness.hpp"

#ifndef OAMSIM_VERSION
#define OAMSIM_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
using namespace oam;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

std::string hash_hex(const std::string& content) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    return buf;
}

json file_entry(const std::string& path) {
    return json{{"path", path}, {"fnv1a64", hash_hex(read_file(path))}};
}

// Manifest written alongside every output; no timestamps, so re-running the
// same command reproduces it byte for byte.
void write_manifest(const std::string& out_path, const std::string& command,
                    std::uint64_t seed, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, const json& options) {
    json m{{"command", command},
           {"tool_version", OAMSIM_VERSION},
           {"seed", seed},
           {"options", options}};
    m["inputs"] = json::array();
    for (const auto& p : inputs) m["inputs"].push_back(file_entry(p));
    m["outputs"] = json::array();
    for (const auto& p : outputs) m["outputs"].push_back(file_entry(p));
    write_file(out_path + ".manifest.json", m.dump(2) + "\n");
}

std::uint64_t env_seed() {
    if (const char* v = std::getenv("OAMSIM_SEED")) {
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw ValidationError("OAMSIM_SEED must be a non-negative integer");
        }
    }
    return 0;
}

// Priority: --seed flag, then config seed, then OAMSIM_SEED, then 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           const ExperimentConfig* config) {
    if (flag) return *flag;
    if (config && config->seed_given) return config->seed;
    return env_seed();
}

ExperimentConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

std::vector<int> parse_mode_list(const std::string& arg) {
    std::vector<int> modes;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            modes.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ValidationError("--modes: '" + item + "' is not an integer");
        }
    }
    if (modes.empty()) throw ValidationError("--modes: empty mode list");
    return modes;
}

json reference_annotations(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("reference file " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------- simulate --

int cmd_simulate(const std::string& config_path, bool stored,
                 const std::string& measurement, const std::string& modes_arg,
                 std::optional<std::uint64_t> seed_flag, const std::string& out) {
    ExperimentConfig cfg = load_config(config_path);
    cfg.seed = resolve_seed(seed_flag, &cfg);

    const DensityMatrix rho = model_state(cfg, stored);
    const double rate = effective_pair_rate(cfg, stored);
    std::vector<Setting> settings;
    if (measurement == "modes") {
        settings = mode_settings(cfg.range());
    } else if (measurement == "tomo") {
        settings = tomo_settings(cfg.range());
    } else if (measurement == "mub") {
        if (modes_arg.empty())
            throw ValidationError("--measurement mub requires --modes");
        settings = mub_settings(parse_mode_list(modes_arg), cfg.range());
    } else {
        throw ValidationError("--measurement must be one of modes, tomo, mub");
    }
    const CoincidenceTable table = simulate_table(
        rho, settings, rate, cfg.acquisition_seconds, cfg.floor_rate, cfg.seed);
    write_coincidence_csv(out, table);

    write_manifest(out, "simulate", cfg.seed, {config_path}, {out},
                   json{{"stored", stored},
                        {"measurement", measurement},
                        {"modes", modes_arg}});
    return 0;
}

// -------------------------------------------------------------------- tomo --

TomoDataset load_tomo(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw IoError("cannot open " + path);
    std::string header;
    std::getline(probe, header);
    probe.close();
    if (header == "j,k,counts") return read_tomo_csv(path);
    return tomo_dataset_from_table(read_coincidence_csv(path));
}

json value_sigma(double v, double s) { return json{{"value", v}, {"sigma", s}}; }

int cmd_tomo(const std::string& counts_path, const std::string& counts2_path,
             int mc_replicates, std::optional<std::uint64_t> seed_flag,
             const std::string& reference_path, const std::string& out) {
    const std::uint64_t seed = resolve_seed(seed_flag, nullptr);
    const TomoDataset data = load_tomo(counts_path);
    const ReconstructionResult rec = mle_reconstruct(data);
    const DensityMatrix ideal = density_from_pure(ideal_qutrit_pair());
    const double f_ideal = uhlmann_fidelity(rec.rho, ideal);

    std::vector<double> flat(81);
    for (int s = 0; s < 81; ++s)
        flat[s] = static_cast<double>(data.counts(s / 9, s % 9));

    MleOptions warm;
    warm.warm_start = &rec.rho;
    double sigma_ideal = 0.0;
    if (mc_replicates > 0) {
        const auto stats = monte_carlo(
            flat,
            [&](std::span<const double> c) {
                TomoDataset redrawn;
                for (int s = 0; s < 81; ++s)
                    redrawn.counts(s / 9, s % 9) = static_cast<std::int64_t>(c[s]);
                const ReconstructionResult r = mle_reconstruct(redrawn, warm);
                return Eigen::VectorXd::Constant(1, uhlmann_fidelity(r.rho, ideal));
            },
            mc_replicates, RngStream(seed, "tomo-mc"));
        sigma_ideal = stats.stddev(0);
    }

    json result{{"reconstruction",
                 {{"rho", density_to_json(rec.rho)},
                  {"log_likelihood", rec.log_likelihood},
                  {"iterations", rec.iterations},
                  {"converged", rec.converged}}},
                {"fidelity_to_ideal", value_sigma(f_ideal, sigma_ideal)},
                {"schmidt_rank3",
                 {{"pass", schmidt_threshold_check(f_ideal).pass},
                  {"margin", schmidt_threshold_check(f_ideal).margin}}},
                {"mc_replicates", mc_replicates},
                {"total_counts", data.total()}};

    std::vector<std::string> inputs = {counts_path};
    if (!counts2_path.empty()) {
        const TomoDataset data2 = load_tomo(counts2_path);
        const ReconstructionResult rec2 = mle_reconstruct(data2);
        const double f2 = uhlmann_fidelity(rec2.rho, rec.rho);
        double sigma_f2 = 0.0;
        if (mc_replicates > 0) {
            // joint resampling of both datasets
            std::vector<double> flat2(162);
            for (int s = 0; s < 81; ++s) {
                flat2[s] = flat[s];
                flat2[81 + s] = static_cast<double>(data2.counts(s / 9, s % 9));
            }
            MleOptions warm2;
            warm2.warm_start = &rec2.rho;
            const auto stats = monte_carlo(
                flat2,
                [&](std::span<const double> c) {
                    TomoDataset ra, rb;
                    for (int s = 0; s < 81; ++s) {
                        ra.counts(s / 9, s % 9) = static_cast<std::int64_t>(c[s]);
                        rb.counts(s / 9, s % 9) = static_cast<std::int64_t>(c[81 + s]);
                    }
                    const ReconstructionResult a = mle_reconstruct(ra, warm);
                    const ReconstructionResult b = mle_reconstruct(rb, warm2);
                    return Eigen::VectorXd::Constant(
                        1, uhlmann_fidelity(b.rho, a.rho));
                },
                mc_replicates, RngStream(seed, "tomo-mc-f2"));
            sigma_f2 = stats.stddev(0);
        }
        result["second_reconstruction"] = {{"rho", density_to_json(rec2.rho)},
                                           {"log_likelihood", rec2.log_likelihood},
                                           {"iterations", rec2.iterations},
                                           {"converged", rec2.converged}};
        result["fidelity_between"] = value_sigma(f2, sigma_f2);
        inputs.push_back(counts2_path);
    }

    if (!reference_path.empty()) {
        result["reference"] = reference_annotations(reference_path);
        inputs.push_back(reference_path);
    }

    write_file(out, result.dump(2) + "\n");
    write_manifest(out, "tomo", seed, inputs, {out},
                   json{{"mc", mc_replicates}, {"counts2", counts2_path}});
    return 0;
}

// ----------------------------------------------------------------- witness --

int cmd_witness(const std::string& counts_path, const std::string& modes_arg,
                double k_sigma, const std::string& convention_arg, int mc_replicates,
                std::optional<std::uint64_t> seed_flag,
                const std::string& reference_path, const std::string& out) {
    const std::uint64_t seed = resolve_seed(seed_flag, nullptr);
    const WitnessData data = witness_data_from_table(read_coincidence_csv(counts_path));

    std::vector<int> modes;
    if (!modes_arg.empty()) {
        modes = parse_mode_list(modes_arg);
    } else {
        std::set<int> seen;
        for (const PairCounts& pc : data.pairs) {
            seen.insert(pc.m);
            seen.insert(pc.n);
        }
        modes.assign(seen.begin(), seen.end());
    }
    const Convention convention = convention_from_string(convention_arg);
    const WitnessReport report =
        build_witness_report(data, modes, k_sigma, convention, mc_replicates, seed);

    json j = witness_report_to_json(report);
    std::vector<std::string> inputs = {counts_path};
    if (!reference_path.empty()) {
        j["reference"] = reference_annotations(reference_path);
        inputs.push_back(reference_path);
    }
    const std::string text_out = out + ".txt";
    write_file(out, j.dump(2) + "\n");
    write_file(text_out, witness_report_text(report));
    write_manifest(out, "witness", seed, inputs, {out, text_out},
                   json{{"modes", modes},
                        {"k_sigma", k_sigma},
                        {"convention", convention_arg},
                        {"mc", mc_replicates}});
    return 0;
}

// --------------------------------------------------------------------- fit --

int cmd_fit(const std::string& in_path, bool poisson, const std::string& out) {
    std::ifstream in(in_path);
    if (!in) throw IoError("cannot open " + in_path);
    std::string line;
    if (!std::getline(in, line) || (line != "x,y" && line != "x,y,weight"))
        throw ValidationError(in_path + ": expected header x,y or x,y,weight");
    const bool has_weights = line == "x,y,weight";
    std::vector<double> xs, ys, ws;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> vals;
        try {
            while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ValidationError(in_path + ":" + std::to_string(lineno) +
                                  ": malformed number");
        }
        if (vals.size() != (has_weights ? 3u : 2u))
            throw ValidationError(in_path + ":" + std::to_string(lineno) +
                                  ": wrong column count");
        xs.push_back(vals[0]);
        ys.push_back(vals[1]);
        if (has_weights) ws.push_back(vals[2]);
    }
    if (!has_weights && poisson) ws = poisson_weights(ys);
    const FitResult fit = fit_lorentzian(xs, ys, ws);
    json j = fit_result_to_json(fit);
    j["hwhm_width_of_data"] = [&]() -> json {
        try {
            return hwhm_width(xs, ys);
        } catch (const DomainError&) {
            return nullptr;
        }
    }();
    write_file(out, j.dump(2) + "\n");
    write_manifest(out, "fit", 0, {in_path}, {out},
                   json{{"poisson_weights", poisson}});
    return 0;
}

// -------------------------------------------------------------------- mask --

int cmd_mask(int m1, int m2, std::optional<double> theta, const std::string& basis,
             int size, double extent, double waist, const std::string& out) {
    if (theta.has_value() == !basis.empty())
        throw ValidationError("mask: give exactly one of --theta or --basis");
    const FieldGridSpec spec{size, extent, waist};
    std::vector<std::string> outputs;
    auto emit = [&](const std::string& stem, Complex alpha, Complex beta) {
        const FieldGrid field = render_superposition(m1, m2, alpha, beta, spec);
        const PhaseMask mask = phase_mask_of_field(field);
        const std::string phase_path = stem + "_phase.pgm";
        const std::string intensity_path = stem + "_intensity.pgm";
        write_pgm(phase_path, spec.size, spec.size, phase_to_bytes(mask));
        write_pgm(intensity_path, spec.size, spec.size, intensity_to_bytes(field));
        outputs.push_back(phase_path);
        outputs.push_back(intensity_path);
    };
    if (theta) {
        emit(out, 1.0, std::polar(1.0, *theta));
    } else {
        if (basis != "x" && basis != "y" && basis != "z")
            throw ValidationError("mask: --basis must be one of x, y, z");
        const SubspaceBasis b = mub_basis(m1, m2, basis[0]);
        const double s2 = std::numbers::sqrt2;  // render unit-amplitude modes
        emit(out + "_plus", b.plus[0] * s2, b.plus[1] * s2);
        emit(out + "_minus", b.minus[0] * s2, b.minus[1] * s2);
    }
    write_manifest(out, "mask", 0, {}, outputs,
                   json{{"m1", m1},
                        {"m2", m2},
                        {"theta", theta ? json(*theta) : json(nullptr)},
                        {"basis", basis},
                        {"size", size},
                        {"extent", extent},
                        {"waist", waist}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and certification toolkit for high-dimensional OAM "
                 "entanglement between two quantum memories"};
    app.require_subcommand(1);
    app.set_version_flag("--version", OAMSIM_VERSION);

    std::string config_path, out, measurement = "modes", modes_arg, counts_path,
                counts2_path, convention = "claims", reference_path, in_path,
                basis;
    bool stored = false, poisson = false;
    int mc = 1000, size = 512;
    int m1 = 0, m2 = 0;
    double k_sigma = 3.0, extent = 3.0, waist = 1.0;
    std::optional<std::uint64_t> seed_flag;
    std::optional<double> theta;

    auto* sim = app.add_subcommand("simulate", "Generate synthetic coincidence data");
    sim->add_option("--config", config_path, "Experiment config JSON")->required();
    sim->add_flag("--stored", stored, "Simulate the post-storage state");
    sim->add_option("--measurement", measurement,
                    "Measurement set: modes, tomo, or mub");
    sim->add_option("--modes", modes_arg, "Mode list for mub measurements, e.g. 2,1,0,-1");
    sim->add_option("--seed", seed_flag, "Override the config seed");
    sim->add_option("--out", out, "Output CSV path")->required();

    auto* tomo = app.add_subcommand("tomo", "Reconstruct a density matrix from counts");
    tomo->add_option("--counts", counts_path, "Tomography counts CSV")->required();
    tomo->add_option("--counts2", counts2_path,
                     "Second dataset; reports the fidelity between reconstructions");
    tomo->add_option("--mc", mc, "Monte Carlo replicates for error bars");
    tomo->add_option("--seed", seed_flag, "Monte Carlo seed");
    tomo->add_option("--reference", reference_path, "Reference values JSON for annotations");
    tomo->add_option("--out", out, "Output JSON path")->required();

    auto* wit = app.add_subcommand("witness", "Entanglement and dimensionality witnesses");
    wit->add_option("--counts", counts_path, "Subspace coincidence CSV")->required();
    wit->add_option("--modes", modes_arg, "Mode list, e.g. 5,4,3,2,1,0,-1,-2,-3,-4,-5");
    wit->add_option("--k-sigma", k_sigma, "Significance multiple for violations");
    wit->add_option("--convention", convention, "Certified-dimension convention: claims or prose");
    wit->add_option("--mc", mc, "Monte Carlo replicates for error bars");
    wit->add_option("--seed", seed_flag, "Monte Carlo seed");
    wit->add_option("--reference", reference_path, "Reference values JSON for annotations");
    wit->add_option("--out", out, "Output JSON path (text summary at <out>.txt)")->required();

    auto* fit = app.add_subcommand("fit", "Fit the Lorentzian form to x,y data");
    fit->add_option("--in", in_path, "Input CSV (x,y or x,y,weight)")->required();
    fit->add_flag("--poisson-weights", poisson, "Weight counts by 1/max(y,1)");
    fit->add_option("--out", out, "Output JSON path")->required();

    auto* mask = app.add_subcommand("mask", "Render superposition phase/intensity masks");
    mask->add_option("--m1", m1, "First azimuthal index")->required();
    mask->add_option("--m2", m2, "Second azimuthal index")->required();
    mask->add_option("--theta", theta, "Relative phase in radians");
    mask->add_option("--basis", basis, "Render both states of a mub basis: x, y, or z");
    mask->add_option("--size", size, "Pixels per side");
    mask->add_option("--extent", extent, "Half-width in waist units");
    mask->add_option("--waist", waist, "Beam waist in grid units");
    mask->add_option("--out", out, "Output path prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, stored, measurement, modes_arg, seed_flag, out);
        if (tomo->parsed())
            return cmd_tomo(counts_path, counts2_path, mc, seed_flag, reference_path, out);
        if (wit->parsed())
            return cmd_witness(counts_path, modes_arg, k_sigma, convention, mc, seed_flag,
                               reference_path, out);
        if (fit->parsed()) return cmd_fit(in_path, poisson, out);
        if (mask->parsed())
            return cmd_mask(m1, m2, theta, basis, size, extent, waist, out);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
