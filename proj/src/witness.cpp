#include "oam/witness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "oam/montecarlo.hpp"

namespace oam {

namespace {

// Unordered pairs of the mode set, in a fixed (i < j) order.
std::vector<std::pair<int, int>> pairs_of(const std::vector<int>& modes) {
    std::vector<std::pair<int, int>> out;
    for (size_t i = 0; i < modes.size(); ++i)
        for (size_t j = i + 1; j < modes.size(); ++j)
            out.emplace_back(modes[i], modes[j]);
    return out;
}

void validate_mode_set(const std::vector<int>& modes) {
    if (modes.size() < 2)
        throw DomainError("witness: mode set needs at least two modes");
    std::set<int> unique(modes.begin(), modes.end());
    if (unique.size() != modes.size())
        throw DomainError("witness: mode set contains duplicates");
}

// Gather the PairCounts rows for every pair of the set; throw naming what is
// missing otherwise.
std::vector<const PairCounts*> gather_pairs(const WitnessData& data,
                                            const std::vector<int>& modes) {
    std::vector<const PairCounts*> found;
    std::vector<std::pair<int, int>> missing;
    for (const auto& [m, n] : pairs_of(modes)) {
        const PairCounts* pc = data.find(m, n);
        if (pc) found.push_back(pc);
        else missing.emplace_back(m, n);
    }
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "witness: missing visibility data for pair(s)";
        for (const auto& [m, n] : missing) msg << " (" << m << "," << n << ")";
        throw IncompleteDataError(msg.str(), std::move(missing));
    }
    return found;
}

// Witness sums as a function of the flattened counts, shared by the point
// estimate and the Monte Carlo replicates. Output: (M, W).
Eigen::Vector2d witness_sums(const std::vector<const PairCounts*>& pairs,
                             std::span<const double> flat) {
    double m_sum = 0.0, w_sum = 0.0;
    for (size_t p = 0; p < pairs.size(); ++p) {
        const double* c = flat.data() + 12 * p;
        PairCounts pc = *pairs[p];
        pc.x = {c[0], c[1], c[2], c[3]};
        pc.y = {c[4], c[5], c[6], c[7]};
        pc.z = {c[8], c[9], c[10], c[11]};
        const Visibilities v = visibilities_from_counts(pc);
        m_sum += v.vx + v.vy;
        w_sum += v.vx + v.vy + v.vz;
    }
    return {m_sum, w_sum};
}

std::vector<double> flatten(const std::vector<const PairCounts*>& pairs) {
    std::vector<double> flat;
    flat.reserve(pairs.size() * 12);
    for (const PairCounts* pc : pairs) {
        for (const BasisCounts* b : {&pc->x, &pc->y, &pc->z}) {
            flat.push_back(b->pp);
            flat.push_back(b->pm);
            flat.push_back(b->mp);
            flat.push_back(b->mm);
        }
    }
    return flat;
}

struct WitnessSums {
    ValueWithSigma m, w;
};

WitnessSums compute_sums(const WitnessData& data, const std::vector<int>& modes,
                         int mc_replicates, RngStream rng) {
    validate_mode_set(modes);
    const auto pairs = gather_pairs(data, modes);
    const std::vector<double> flat = flatten(pairs);
    const Eigen::Vector2d point = witness_sums(pairs, flat);
    WitnessSums sums;
    sums.m.value = point(0);
    sums.w.value = point(1);
    if (mc_replicates > 0) {
        const auto stats = monte_carlo(
            flat,
            [&](std::span<const double> redrawn) -> Eigen::VectorXd {
                return witness_sums(pairs, redrawn);
            },
            mc_replicates, std::move(rng));
        sums.m.sigma = stats.stddev(0);
        sums.w.sigma = stats.stddev(1);
    }
    return sums;
}

}  // namespace

Convention convention_from_string(const std::string& s) {
    if (s == "claims") return Convention::claims;
    if (s == "prose") return Convention::prose;
    throw DomainError("convention must be 'claims' or 'prose', got '" + s + "'");
}

std::string to_string(Convention c) {
    return c == Convention::claims ? "claims" : "prose";
}

double bound_M(int d) {
    if (d < 2) throw DomainError("bound_M: d must be at least 2");
    const long long dm1 = d - 1;
    return static_cast<double>(dm1 * dm1);
}

double bound_W(int big_d, int d) {
    if (d < 2) throw DomainError("bound_W: d must be at least 2");
    if (d > big_d) throw DomainError("bound_W: d must not exceed the mode count D");
    const long long dd = big_d;
    return static_cast<double>(3 * dd * (dd - 1) / 2 - dd * (dd - d));
}

const PairCounts* WitnessData::find(int m, int n) const {
    for (const PairCounts& pc : pairs)
        if ((pc.m == m && pc.n == n) || (pc.m == n && pc.n == m)) return &pc;
    return nullptr;
}

WitnessData witness_data_from_table(const CoincidenceTable& table) {
    struct Key {
        int m, n;
        char basis;
        bool operator<(const Key& o) const {
            return std::tie(m, n, basis) < std::tie(o.m, o.n, o.basis);
        }
    };
    auto parse_label = [](const std::string& label) {
        int m = 0, n = 0;
        char basis = 0, out = 0;
        if (std::sscanf(label.c_str(), "pair=%d,%d;basis=%c;out=%c", &m, &n, &basis,
                        &out) != 4 ||
            (basis != 'x' && basis != 'y' && basis != 'z') || (out != '+' && out != '-'))
            throw ValidationError("coincidence table: label '" + label +
                                  "' is not a subspace setting");
        return std::tuple<int, int, char, char>{m, n, basis, out};
    };

    std::map<std::pair<int, int>, PairCounts> by_pair;
    for (const auto& row : table.rows) {
        const auto [ma, na, basis_a, out_a] = parse_label(row.setting_a);
        const auto [mb, nb, basis_b, out_b] = parse_label(row.setting_b);
        if (ma != mb || na != nb || basis_a != basis_b)
            throw ValidationError(
                "coincidence table: arms measure different subspace settings ('" +
                row.setting_a + "' vs '" + row.setting_b + "')");
        auto [it, inserted] = by_pair.try_emplace({ma, na});
        PairCounts& pc = it->second;
        if (inserted) {
            pc.m = ma;
            pc.n = na;
            pc.seconds = row.seconds;
        }
        BasisCounts& bc = basis_a == 'x' ? pc.x : basis_a == 'y' ? pc.y : pc.z;
        double& cell = out_a == '+' ? (out_b == '+' ? bc.pp : bc.pm)
                                    : (out_b == '+' ? bc.mp : bc.mm);
        cell += static_cast<double>(row.counts);
    }
    WitnessData data;
    data.pairs.reserve(by_pair.size());
    for (auto& [key, pc] : by_pair) data.pairs.push_back(std::move(pc));
    return data;
}

ValueWithSigma compute_M(const WitnessData& data, const std::vector<int>& mode_set,
                         int mc_replicates, RngStream rng) {
    return compute_sums(data, mode_set, mc_replicates, std::move(rng)).m;
}

ValueWithSigma compute_W(const WitnessData& data, const std::vector<int>& mode_set,
                         int mc_replicates, RngStream rng) {
    return compute_sums(data, mode_set, mc_replicates, std::move(rng)).w;
}

SchmidtCheck schmidt_threshold_check(double fidelity) {
    if (fidelity < 0.0 || fidelity > 1.0)
        throw DomainError("schmidt_threshold_check: fidelity must be in [0, 1]");
    const double threshold = 2.0 / 3.0;
    return SchmidtCheck{fidelity > threshold, fidelity - threshold};
}

int certify_dimension(double w, double sigma_w, int big_d, double k_sigma,
                      Convention convention) {
    if (big_d < 2) throw DomainError("certify_dimension: D must be at least 2");
    if (k_sigma < 0.0) throw DomainError("certify_dimension: k_sigma must be non-negative");
    if (sigma_w < 0.0) throw DomainError("certify_dimension: sigma_W must be non-negative");
    int best = 1;
    for (int d = 2; d <= big_d; ++d)
        if (w - bound_W(big_d, d) > k_sigma * sigma_w) best = d;
    if (best == 1) return 1;
    return convention == Convention::claims ? best : best + 1;
}

WitnessReport build_witness_report(const WitnessData& data,
                                   const std::vector<int>& mode_set, double k_sigma,
                                   Convention convention, int mc_replicates,
                                   std::uint64_t seed) {
    WitnessReport report;
    report.mode_set = mode_set;
    report.big_d = static_cast<int>(mode_set.size());
    report.k_sigma = k_sigma;
    report.convention = convention;

    validate_mode_set(mode_set);
    const auto pairs = gather_pairs(data, mode_set);
    RngStream rng(seed, "witness-mc");
    for (const PairCounts* pc : pairs)
        report.pair_visibilities.push_back(
            mc_replicates > 0
                ? visibilities_from_counts(*pc, mc_replicates, rng.substream(
                      "pair:" + std::to_string(pc->m) + "," + std::to_string(pc->n)))
                : visibilities_from_counts(*pc));

    const WitnessSums sums =
        compute_sums(data, mode_set, mc_replicates, rng.substream("sums"));
    report.m = sums.m;
    report.w = sums.w;

    for (int d = 2; d <= report.big_d; ++d) {
        report.bounds_m[d] = bound_M(d);
        report.bounds_w[d] = bound_W(report.big_d, d);
        WitnessViolation v;
        v.excess = report.w.value - report.bounds_w[d];
        v.significance = report.w.sigma > 0.0 ? v.excess / report.w.sigma : 0.0;
        report.violations_w[d] = v;
    }

    report.certified_dimension_claims =
        certify_dimension(report.w.value, report.w.sigma, report.big_d, k_sigma,
                          Convention::claims);
    report.certified_dimension_prose =
        certify_dimension(report.w.value, report.w.sigma, report.big_d, k_sigma,
                          Convention::prose);
    report.certified_dimension = convention == Convention::claims
                                     ? report.certified_dimension_claims
                                     : report.certified_dimension_prose;

    int best_m = 1;
    for (int d = 2; d <= report.big_d; ++d)
        if (report.m.value - bound_M(d) > k_sigma * report.m.sigma) best_m = d;
    report.certified_dimension_m = best_m;
    return report;
}

nlohmann::json witness_report_to_json(const WitnessReport& report) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const Visibilities& v : report.pair_visibilities)
        pairs.push_back({{"m", v.m},
                         {"n", v.n},
                         {"V_x", v.vx},
                         {"V_y", v.vy},
                         {"V_z", v.vz},
                         {"sigma_V_x", v.sigma_vx},
                         {"sigma_V_y", v.sigma_vy},
                         {"sigma_V_z", v.sigma_vz}});
    nlohmann::json bounds_m, bounds_w, violations;
    for (const auto& [d, b] : report.bounds_m) bounds_m[std::to_string(d)] = b;
    for (const auto& [d, b] : report.bounds_w) bounds_w[std::to_string(d)] = b;
    for (const auto& [d, v] : report.violations_w)
        violations[std::to_string(d)] = {{"excess", v.excess},
                                         {"significance", v.significance}};
    return nlohmann::json{{"mode_set", report.mode_set},
                          {"D", report.big_d},
                          {"pair_visibilities", pairs},
                          {"M", report.m.value},
                          {"sigma_M", report.m.sigma},
                          {"W", report.w.value},
                          {"sigma_W", report.w.sigma},
                          {"bounds_M", bounds_m},
                          {"bounds_W", bounds_w},
                          {"violations_W", violations},
                          {"certified_dimension", report.certified_dimension},
                          {"certified_dimension_claims", report.certified_dimension_claims},
                          {"certified_dimension_prose", report.certified_dimension_prose},
                          {"certified_dimension_M", report.certified_dimension_m},
                          {"k_sigma", report.k_sigma},
                          {"convention", to_string(report.convention)}};
}

std::string witness_report_text(const WitnessReport& report) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(3);
    out << "Witness report over D = " << report.big_d << " modes {";
    for (size_t i = 0; i < report.mode_set.size(); ++i)
        out << (i ? "," : "") << report.mode_set[i];
    out << "}\n";
    out << "M = " << report.m.value << " +/- " << report.m.sigma << "  (sum of V_x + V_y over "
        << report.pair_visibilities.size() << " pairs)\n";
    if (report.certified_dimension_m > 1)
        out << "  M violates M_d = " << report.bounds_m.at(report.certified_dimension_m)
            << " for d = " << report.certified_dimension_m << ": at least "
            << report.certified_dimension_m << "-dimensional entanglement\n";
    else
        out << "  M violates no entanglement bound\n";
    out << "W = " << report.w.value << " +/- " << report.w.sigma
        << "  (sum of V_x + V_y + V_z over all pairs)\n";
    bool any = false;
    for (const auto& [d, v] : report.violations_w) {
        if (v.excess > report.k_sigma * report.w.sigma) {
            out << "  W violates W_d = " << report.bounds_w.at(d) << " (d = " << d
                << ") by " << v.excess;
            if (report.w.sigma > 0.0)
                out << ", i.e. " << v.significance << " standard deviations";
            out << "\n";
            any = true;
        }
    }
    if (!any) out << "  W violates no dimensionality bound\n";
    out << "certified dimension (claims convention): " << report.certified_dimension_claims
        << "\n";
    out << "certified dimension (prose convention):  " << report.certified_dimension_prose
        << "\n";
    return out.str();
}

}  // namespace oam
