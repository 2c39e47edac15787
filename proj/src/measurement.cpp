#include "oam/measurement.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "oam/montecarlo.hpp"

namespace oam {

namespace {

std::string mode_label(int m) { return "m=" + std::to_string(m); }

std::string mub_label(int m, int n, char basis, char out) {
    return "pair=" + std::to_string(m) + "," + std::to_string(n) + ";basis=" +
           std::string(1, basis) + ";out=" + std::string(1, out);
}

}  // namespace

void write_coincidence_csv(const std::string& path, const CoincidenceTable& table) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "setting_a,setting_b,counts,seconds\n";
    for (const auto& row : table.rows) {
        std::ostringstream sec;
        sec << row.seconds;
        out << row.setting_a << "," << row.setting_b << "," << row.counts << ","
            << sec.str() << "\n";
    }
    if (!out) throw Error("write failed for " + path);
}

CoincidenceTable read_coincidence_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "setting_a,setting_b,counts,seconds")
        throw ValidationError(path + ": expected header setting_a,setting_b,counts,seconds");
    CoincidenceTable table;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        // Setting labels embed one comma in the "pair=m,n" form, so a plain
        // comma split over-segments them. Tokenize and re-join: a token that
        // opens a pair label but has no ';' yet is incomplete.
        std::vector<std::string> tokens;
        size_t start = 0;
        while (start <= line.size()) {
            const size_t comma = line.find(',', start);
            tokens.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        auto take_label = [&](size_t& i) {
            std::string label = tokens.at(i++);
            if (label.rfind("pair=", 0) == 0 && label.find(';') == std::string::npos)
                label += "," + tokens.at(i++);
            return label;
        };
        try {
            size_t i = 0;
            CoincidenceRow row;
            row.setting_a = take_label(i);
            row.setting_b = take_label(i);
            row.counts = std::stoll(tokens.at(i++));
            row.seconds = std::stod(tokens.at(i++));
            if (i != tokens.size()) throw std::out_of_range("extra columns");
            if (row.counts < 0) throw std::out_of_range("negative counts");
            table.rows.push_back(std::move(row));
        } catch (const std::exception&) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": malformed row");
        }
    }
    return table;
}

double born_probability(const DensityMatrix& rho, const Setting& s) {
    if (s.projector_a.dim() * s.projector_b.dim() != rho.dim())
        throw DomainError("born_probability: projector dimensions do not match the state");
    const Vector ab = kron_product(s.projector_a.amplitudes(), s.projector_b.amplitudes());
    const Complex val = ab.adjoint() * rho.entries() * ab;
    return val.real();
}

std::int64_t sample_counts(double mean, RngStream& rng) { return rng.poisson(mean); }

DensityMatrix model_state(const ExperimentConfig& config, bool stored) {
    const ModeRange range = config.range();
    SpiralSpectrum spectrum = build_spiral_spectrum(config.source_lorentzian, range);
    if (stored) {
        if (!config.storage_lorentzian)
            throw ValidationError("config: 'storage_lorentzian' required for a stored run");
        spectrum = apply_storage(
            spectrum, storage_profile_from_lorentzian(*config.storage_lorentzian, range));
    }
    DensityMatrix rho = density_from_pure(joint_state(spectrum));
    return apply_noise(rho, NoiseParams{config.epsilon, config.floor_rate});
}

double effective_pair_rate(const ExperimentConfig& config, bool stored) {
    if (!stored) return config.pair_rate;
    if (!config.storage_lorentzian)
        throw ValidationError("config: 'storage_lorentzian' required for a stored run");
    const ModeRange range = config.range();
    const SpiralSpectrum spectrum = build_spiral_spectrum(config.source_lorentzian, range);
    const StorageProfile profile =
        storage_profile_from_lorentzian(*config.storage_lorentzian, range);
    const double survival =
        spectrum.coefficients.cwiseAbs2().dot(profile.efficiencies);
    return config.pair_rate * survival;
}

std::vector<Setting> mode_settings(const ModeRange& range) {
    std::vector<Setting> settings;
    settings.reserve(static_cast<size_t>(range.size()) * range.size());
    for (int i = 0; i < range.size(); ++i) {
        Vector a = Vector::Zero(range.size());
        a(i) = 1.0;
        for (int j = 0; j < range.size(); ++j) {
            Vector b = Vector::Zero(range.size());
            b(j) = 1.0;
            settings.push_back(Setting{PureState(a), PureState(b),
                                       mode_label(range.mode_at(i)),
                                       mode_label(range.mode_at(j))});
        }
    }
    return settings;
}

std::vector<Setting> tomo_settings(const ModeRange& range) {
    for (int m : {-1, 0, 1})
        if (!range.contains(m))
            throw DomainError("tomo_settings: mode range must contain -1, 0, +1");
    const auto states = qutrit_tomo_states();
    // embed each qutrit state at modes (-1, 0, +1) of the full range
    std::vector<PureState> embedded;
    embedded.reserve(9);
    for (const PureState& s : states) {
        Vector v = Vector::Zero(range.size());
        for (int k = 0; k < 3; ++k) v(range.index(k - 1)) = s.amplitude(k);
        embedded.push_back(PureState(std::move(v)));
    }
    std::vector<Setting> settings;
    settings.reserve(81);
    for (int j = 0; j < 9; ++j)
        for (int k = 0; k < 9; ++k)
            settings.push_back(Setting{embedded[j], embedded[k],
                                       "t" + std::to_string(j + 1),
                                       "t" + std::to_string(k + 1)});
    return settings;
}

std::vector<Setting> mub_settings(const std::vector<int>& modes, const ModeRange& range) {
    if (modes.size() < 2) throw DomainError("mub_settings: need at least two modes");
    std::vector<Setting> settings;
    for (size_t i = 0; i < modes.size(); ++i) {
        for (size_t j = i + 1; j < modes.size(); ++j) {
            const int m = modes[i], n = modes[j];
            if (m == n) throw DomainError("mub_settings: duplicate mode in list");
            for (char basis : {'x', 'y', 'z'}) {
                const SubspaceBasis b = mub_basis(m, n, basis);
                const PureState plus = embed_pair_state(b.plus, m, n, range);
                const PureState minus = embed_pair_state(b.minus, m, n, range);
                const struct { const PureState* s; char out; } outs[2] = {{&plus, '+'},
                                                                          {&minus, '-'}};
                for (const auto& oa : outs)
                    for (const auto& ob : outs)
                        settings.push_back(Setting{*oa.s, *ob.s,
                                                   mub_label(m, n, basis, oa.out),
                                                   mub_label(m, n, basis, ob.out)});
            }
        }
    }
    return settings;
}

CoincidenceTable simulate_table(const DensityMatrix& rho,
                                const std::vector<Setting>& settings, double pair_rate,
                                double seconds, double floor_rate, std::uint64_t seed) {
    if (pair_rate < 0.0 || floor_rate < 0.0 || seconds <= 0.0)
        throw DomainError("simulate_table: rates must be non-negative, seconds positive");
    const RngStream root(seed, "coincidence-counts");
    CoincidenceTable table;
    table.rows.reserve(settings.size());
    for (const Setting& s : settings) {
        const double p = std::max(born_probability(rho, s), 0.0);
        const double mean = (pair_rate * p + floor_rate) * seconds;
        RngStream stream = root.substream(s.label_a + "|" + s.label_b);
        table.rows.push_back(
            CoincidenceRow{s.label_a, s.label_b, stream.poisson(mean), seconds});
    }
    return table;
}

CoincidenceTable simulate_coincidence_matrix(const ExperimentConfig& config, bool stored) {
    return simulate_table(model_state(config, stored), mode_settings(config.range()),
                          effective_pair_rate(config, stored),
                          config.acquisition_seconds, config.floor_rate, config.seed);
}

double visibility(const BasisCounts& counts) {
    const double total = counts.total();
    if (total <= 0.0)
        throw UndefinedVisibilityError("visibility: zero total counts in basis");
    return std::abs(counts.pp + counts.mm - counts.pm - counts.mp) / total;
}

Visibilities visibilities_from_counts(const PairCounts& counts) {
    Visibilities v;
    v.m = counts.m;
    v.n = counts.n;
    v.vx = visibility(counts.x);
    v.vy = visibility(counts.y);
    v.vz = visibility(counts.z);
    return v;
}

Visibilities visibilities_from_counts(const PairCounts& counts, int mc_replicates,
                                      RngStream rng) {
    Visibilities v = visibilities_from_counts(counts);
    const std::array<double, 12> flat = {counts.x.pp, counts.x.pm, counts.x.mp, counts.x.mm,
                                         counts.y.pp, counts.y.pm, counts.y.mp, counts.y.mm,
                                         counts.z.pp, counts.z.pm, counts.z.mp, counts.z.mm};
    const auto stats = monte_carlo(
        flat,
        [&](std::span<const double> c) {
            PairCounts redrawn = counts;
            redrawn.x = {c[0], c[1], c[2], c[3]};
            redrawn.y = {c[4], c[5], c[6], c[7]};
            redrawn.z = {c[8], c[9], c[10], c[11]};
            const Visibilities rv = visibilities_from_counts(redrawn);
            return Eigen::Vector3d(rv.vx, rv.vy, rv.vz);
        },
        mc_replicates, std::move(rng));
    v.sigma_vx = stats.stddev(0);
    v.sigma_vy = stats.stddev(1);
    v.sigma_vz = stats.stddev(2);
    return v;
}

PairCounts exact_pair_counts(const DensityMatrix& rho, int m, int n,
                             const ModeRange& range) {
    PairCounts pc;
    pc.m = m;
    pc.n = n;
    for (char basis : {'x', 'y', 'z'}) {
        const SubspaceBasis b = mub_basis(m, n, basis);
        const PureState plus = embed_pair_state(b.plus, m, n, range);
        const PureState minus = embed_pair_state(b.minus, m, n, range);
        BasisCounts bc;
        bc.pp = born_probability(rho, {plus, plus, "", ""});
        bc.pm = born_probability(rho, {plus, minus, "", ""});
        bc.mp = born_probability(rho, {minus, plus, "", ""});
        bc.mm = born_probability(rho, {minus, minus, "", ""});
        if (basis == 'x') pc.x = bc;
        else if (basis == 'y') pc.y = bc;
        else pc.z = bc;
    }
    return pc;
}

}  // namespace oam
