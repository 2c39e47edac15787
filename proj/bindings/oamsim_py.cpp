// Python bindings for the main operations: state algebra, the source model,
// visibilities, tomography, witnesses, and fitting. Matrix arguments are
// plain numpy arrays; validation happens in the underlying types.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "oam/fitting.hpp"
#include "oam/measurement.hpp"
#include "oam/modes.hpp"
#include "oam/rng.hpp"
#include "oam/source.hpp"
#include "oam/tomography.hpp"
#include "oam/witness.hpp"

namespace py = pybind11;
using namespace oam;

namespace {

DensityMatrix as_density(const Matrix& m) { return DensityMatrix(m); }

LorentzianParams params_from_tuple(double y0, double xc, double w, double a) {
    LorentzianParams p{y0, xc, w, a};
    validate(p);
    return p;
}

TomoDataset dataset_from_array(
    const Eigen::Ref<const Eigen::Matrix<std::int64_t, 9, 9>>& counts) {
    TomoDataset data;
    data.counts = counts;
    return data;
}

}  // namespace

PYBIND11_MODULE(_oamsim, m) {
    m.doc() = "Two-memory OAM entanglement simulator and certification toolkit";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    // --- quantum states ---
    m.def("density_from_pure", [](const Vector& amplitudes) {
        return density_from_pure(PureState(amplitudes)).entries();
    }, py::arg("amplitudes"), "Outer product |psi><psi| of a normalized vector");
    m.def("matrix_sqrt_psd", &matrix_sqrt_psd, py::arg("h"));
    m.def("uhlmann_fidelity", [](const Matrix& rho, const Matrix& sigma) {
        return uhlmann_fidelity(as_density(rho), as_density(sigma));
    }, py::arg("rho"), py::arg("sigma"));
    m.def("project_to_physical", [](const Matrix& h) {
        return project_to_physical(h).entries();
    }, py::arg("h"), "Closest PSD unit-trace matrix (eigenvalue truncation)");
    m.def("kron_product", [](const Matrix& a, const Matrix& b) {
        return kron_product(a, b);
    }, py::arg("a"), py::arg("b"));
    m.def("ideal_qutrit_pair", [] { return ideal_qutrit_pair().amplitudes(); },
          "(|LL> + |GG> + |RR>)/sqrt(3), basis order (L, G, R) per arm");

    // --- modes and masks ---
    m.def("lg_amplitude", &lg_amplitude, py::arg("m"), py::arg("r"), py::arg("phi"),
          py::arg("w0") = 1.0);
    m.def("superposition_phase_mask",
          [](int m1, int m2, double theta, int size, double extent, double waist) {
              const PhaseMask mask =
                  superposition_phase_mask(m1, m2, theta, {size, extent, waist});
              Eigen::MatrixXd phase(size, size);
              Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> flagged(size, size);
              for (int r = 0; r < size; ++r)
                  for (int c = 0; c < size; ++c) {
                      phase(r, c) = mask.phase[r * size + c];
                      flagged(r, c) = mask.flagged[r * size + c];
                  }
              return py::make_tuple(phase, flagged);
          },
          py::arg("m1"), py::arg("m2"), py::arg("theta"), py::arg("size") = 512,
          py::arg("extent") = 3.0, py::arg("waist") = 1.0,
          "Arg(LG_m1 + e^{i theta} LG_m2) per pixel in [0, 2pi); returns (phase, flagged)");
    m.def("qutrit_tomo_states", [] {
        std::vector<Vector> out;
        for (const PureState& s : qutrit_tomo_states()) out.push_back(s.amplitudes());
        return out;
    }, "The nine projection states over (L, G, R), in the fixed order");
    m.def("mub_state", [](int mode_m, int mode_n, char label, bool minus, int m_min, int m_max) {
        const SubspaceBasis b = mub_basis(mode_m, mode_n, label);
        return embed_pair_state(minus ? b.minus : b.plus, mode_m, mode_n,
                                make_mode_range(m_min, m_max)).amplitudes();
    }, py::arg("m"), py::arg("n"), py::arg("basis"), py::arg("minus"),
       py::arg("mode_min"), py::arg("mode_max"));

    // --- source model ---
    m.def("lorentzian_eval", [](double x, double y0, double xc, double w, double a) {
        return lorentzian_eval(x, params_from_tuple(y0, xc, w, a));
    }, py::arg("x"), py::arg("y0"), py::arg("xc"), py::arg("w"), py::arg("A"),
       "y0 + (2A/pi) w / (4(x-xc)^2 + w^2)");
    m.def("build_spiral_spectrum",
          [](double y0, double xc, double w, double a, int m_min, int m_max) {
              return build_spiral_spectrum(params_from_tuple(y0, xc, w, a),
                                           make_mode_range(m_min, m_max)).coefficients;
          },
          py::arg("y0"), py::arg("xc"), py::arg("w"), py::arg("A"), py::arg("mode_min"),
          py::arg("mode_max"));
    m.def("joint_state", [](const Eigen::VectorXd& coefficients, int m_min, int m_max) {
        const ModeRange range = make_mode_range(m_min, m_max);
        if (coefficients.size() != range.size())
            throw DomainError("joint_state: coefficient count does not match mode range");
        return joint_state(SpiralSpectrum{range, coefficients}).amplitudes();
    }, py::arg("coefficients"), py::arg("mode_min"), py::arg("mode_max"));
    m.def("apply_storage",
          [](const Eigen::VectorXd& coefficients, const Eigen::VectorXd& efficiencies,
             int m_min, int m_max) {
              const ModeRange range = make_mode_range(m_min, m_max);
              return apply_storage(SpiralSpectrum{range, coefficients},
                                   StorageProfile{range, efficiencies}).coefficients;
          },
          py::arg("coefficients"), py::arg("efficiencies"), py::arg("mode_min"),
          py::arg("mode_max"));
    m.def("storage_profile", [](double y0, double xc, double w, double a, int m_min, int m_max) {
        return storage_profile_from_lorentzian(params_from_tuple(y0, xc, w, a),
                                               make_mode_range(m_min, m_max)).efficiencies;
    }, py::arg("y0"), py::arg("xc"), py::arg("w"), py::arg("A"), py::arg("mode_min"),
       py::arg("mode_max"));
    m.def("apply_noise", [](const Matrix& rho, double epsilon) {
        return apply_noise(as_density(rho), NoiseParams{epsilon, 0.0}).entries();
    }, py::arg("rho"), py::arg("epsilon"), "(1 - eps) rho + eps I/dim");

    // --- measurement ---
    m.def("born_probability", [](const Matrix& rho, const Vector& a, const Vector& b) {
        return born_probability(as_density(rho), Setting{PureState(a), PureState(b), "", ""});
    }, py::arg("rho"), py::arg("projector_a"), py::arg("projector_b"));
    m.def("pair_visibilities", [](const Matrix& rho, int mode_m, int mode_n, int m_min, int m_max) {
        const Visibilities v = visibilities_from_counts(exact_pair_counts(
            as_density(rho), mode_m, mode_n, make_mode_range(m_min, m_max)));
        return py::make_tuple(v.vx, v.vy, v.vz);
    }, py::arg("rho"), py::arg("m"), py::arg("n"), py::arg("mode_min"), py::arg("mode_max"),
       "Exact-probability visibilities (V_x, V_y, V_z) of a 2x2 OAM subspace");
    m.def("simulate_coincidence_matrix", [](const std::string& config_json, bool stored) {
        const ExperimentConfig cfg = config_from_json(nlohmann::json::parse(config_json));
        const CoincidenceTable table = simulate_coincidence_matrix(cfg, stored);
        std::vector<std::tuple<std::string, std::string, std::int64_t, double>> rows;
        for (const auto& r : table.rows)
            rows.emplace_back(r.setting_a, r.setting_b, r.counts, r.seconds);
        return rows;
    }, py::arg("config_json"), py::arg("stored") = false,
       "Poisson-sampled mode-correlation table for an experiment config");

    // --- tomography ---
    m.def("forward_probabilities", [](const Matrix& rho) {
        const auto p = forward_probabilities(as_density(rho));
        return std::vector<double>(p.begin(), p.end());
    }, py::arg("rho"));
    m.def("linear_inversion", [](const Eigen::Matrix<std::int64_t, 9, 9>& counts) {
        return linear_inversion(dataset_from_array(counts));
    }, py::arg("counts"));
    m.def("mle_reconstruct",
          [](const Eigen::Matrix<std::int64_t, 9, 9>& counts, double tolerance,
             int max_iterations) {
              MleOptions opts;
              opts.tolerance = tolerance;
              opts.max_iterations = max_iterations;
              const ReconstructionResult r = mle_reconstruct(dataset_from_array(counts), opts);
              py::dict out;
              out["rho"] = r.rho.entries();
              out["log_likelihood"] = r.log_likelihood;
              out["iterations"] = r.iterations;
              out["converged"] = r.converged;
              return out;
          },
          py::arg("counts"), py::arg("tolerance") = 1e-10,
          py::arg("max_iterations") = 10000,
          "Iterative maximum-likelihood reconstruction of a 9x9 two-qutrit state");

    // --- witnesses ---
    m.def("bound_M", &bound_M, py::arg("d"), "(d-1)^2");
    m.def("bound_W", &bound_W, py::arg("D"), py::arg("d"), "3 D(D-1)/2 - D(D-d)");
    m.def("schmidt_threshold_check", [](double fidelity) {
        const SchmidtCheck c = schmidt_threshold_check(fidelity);
        return py::make_tuple(c.pass, c.margin);
    }, py::arg("fidelity"), "Strict F > 2/3 test; returns (pass, margin)");
    m.def("certify_dimension", [](double w, double sigma_w, int big_d, double k_sigma,
                                  const std::string& convention) {
        return certify_dimension(w, sigma_w, big_d, k_sigma,
                                 convention_from_string(convention));
    }, py::arg("W"), py::arg("sigma_W"), py::arg("D"), py::arg("k_sigma") = 3.0,
       py::arg("convention") = "claims");

    // --- fitting ---
    m.def("fit_lorentzian",
          [](const std::vector<double>& xs, const std::vector<double>& ys,
             const std::vector<double>& weights) {
              const FitResult r = fit_lorentzian(xs, ys, weights);
              py::dict out;
              out["y0"] = r.params.y0;
              out["xc"] = r.params.xc;
              out["w"] = r.params.w;
              out["A"] = r.params.a;
              out["residual_rms"] = r.residual_rms;
              out["covariance"] = r.covariance;
              out["converged"] = r.converged;
              out["iterations"] = r.iterations;
              return out;
          },
          py::arg("xs"), py::arg("ys"), py::arg("weights") = std::vector<double>{});
    m.def("hwhm_width", [](const std::vector<double>& xs, const std::vector<double>& ys) {
        return hwhm_width(xs, ys);
    }, py::arg("xs"), py::arg("ys"));

    // --- deterministic rng ---
    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t, std::string_view>(), py::arg("seed"), py::arg("label"))
        .def("poisson", &RngStream::poisson, py::arg("mean"))
        .def("uniform", &RngStream::next_double)
        .def("substream",
             [](const RngStream& s, const std::string& label) { return s.substream(label); },
             py::arg("label"));

#ifdef OAMSIM_VERSION
    m.attr("__version__") = OAMSIM_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
