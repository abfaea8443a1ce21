// SPDX-License-Identifier: Apache-2.0
//
// Python bindings: nfkit._core. Arrays cross as numpy (complex128 / float64).

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nfkit/array_model.hpp"
#include "nfkit/beamformers.hpp"
#include "nfkit/cumulant.hpp"
#include "nfkit/errors.hpp"
#include "nfkit/focusing.hpp"
#include "nfkit/music.hpp"
#include "nfkit/polar_omp.hpp"
#include "nfkit/runner.hpp"
#include "nfkit/scenario.hpp"
#include "nfkit/squint.hpp"
#include "nfkit/wigner.hpp"

namespace py = pybind11;
using namespace nfkit;
namespace rn = nfkit::runner;

namespace {

// Runs an experiment from a JSON document and returns (csv, {aux name: csv}).
py::tuple run_json(const std::string& text) {
  const rn::ExperimentConfig cfg = rn::resolve_config(rn::parse_config(text, "<python>"));
  rn::RunResult res;
  {
    py::gil_scoped_release release;
    res = rn::run(cfg);
  }
  py::dict aux;
  for (const auto& [name, table] : res.auxiliary) aux[py::str(name)] = table.to_csv();
  return py::make_tuple(res.table.to_csv(), aux);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Near-field array signal processing core";
  m.attr("__version__") = NFKIT_VERSION;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<PeakShortageError>(m, "PeakShortageError", PyExc_RuntimeError);
  py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

  py::enum_<SteeringModel>(m, "SteeringModel")
      .value("EXACT", SteeringModel::ExactSpherical)
      .value("FRESNEL", SteeringModel::FresnelQuadratic)
      .value("PLANAR", SteeringModel::FarFieldPlanar);
  py::enum_<FieldRegion>(m, "FieldRegion")
      .value("REACTIVE_NF", FieldRegion::ReactiveNF)
      .value("RADIATIVE_NF", FieldRegion::RadiativeNF)
      .value("FAR_FIELD", FieldRegion::FarField);
  py::enum_<Waveform>(m, "Waveform")
      .value("GAUSSIAN", Waveform::CircularGaussian)
      .value("QPSK", Waveform::QPSK)
      .value("RANDOM_PHASE", Waveform::ConstantModulusRandomPhase);

  // ---------------------------------------------------------- array model
  py::class_<ArrayGeometry>(m, "ArrayGeometry")
      .def(py::init<int, double, double, int, double>(), py::arg("num_elements"), py::arg("spacing"),
           py::arg("carrier_freq"), py::arg("phase_reference") = 0, py::arg("propagation_speed") = kSpeedOfLight)
      .def_static("half_wavelength", &ArrayGeometry::half_wavelength, py::arg("num_elements"),
                  py::arg("carrier_freq"), py::arg("phase_reference") = 0,
                  py::arg("propagation_speed") = kSpeedOfLight)
      .def_static("from_wavelength", &ArrayGeometry::from_wavelength, py::arg("num_elements"), py::arg("spacing"),
                  py::arg("wavelength"), py::arg("phase_reference") = 0,
                  py::arg("propagation_speed") = kSpeedOfLight)
      .def_property_readonly("num_elements", &ArrayGeometry::num_elements)
      .def_property_readonly("spacing", &ArrayGeometry::spacing)
      .def_property_readonly("carrier_freq", &ArrayGeometry::carrier_freq)
      .def_property_readonly("wavelength", &ArrayGeometry::wavelength)
      .def_property_readonly("phase_reference", &ArrayGeometry::phase_reference)
      .def_property_readonly("aperture", &ArrayGeometry::aperture)
      .def("centered", &ArrayGeometry::centered)
      .def("with_carrier", &ArrayGeometry::with_carrier, py::arg("carrier_freq"))
      .def("__repr__", [](const ArrayGeometry& g) {
        return "ArrayGeometry(N=" + std::to_string(g.num_elements()) + ", d=" + std::to_string(g.spacing()) +
               ", lambda=" + std::to_string(g.wavelength()) + ", ref=" + std::to_string(g.phase_reference()) + ")";
      });

  py::class_<RegionBoundaries>(m, "RegionBoundaries")
      .def_readonly("reactive_limit", &RegionBoundaries::reactive_limit)
      .def_readonly("fraunhofer", &RegionBoundaries::fraunhofer)
      .def_readonly("antenna_reactive_inner", &RegionBoundaries::antenna_reactive_inner);
  m.def("region_boundaries", &region_boundaries, py::arg("geometry"));
  m.def("classify_range", &classify_range, py::arg("geometry"), py::arg("r"));
  m.def("steering", &steering, py::arg("geometry"), py::arg("theta"), py::arg("r"),
        py::arg("model") = SteeringModel::FresnelQuadratic);
  m.def("max_planar_phase_error", &max_planar_phase_error, py::arg("geometry"), py::arg("theta"), py::arg("r"));
  m.def(
      "wavefront_mismatch_mse",
      [](const ArrayGeometry& g, double theta, const std::vector<double>& r) {
        std::vector<double> out;
        for (const auto& p : wavefront_mismatch_mse(g, theta, r)) out.push_back(p.mse);
        return out;
      },
      py::arg("geometry"), py::arg("theta"), py::arg("ranges"));
  m.def(
      "fresnel_integrals", [](double z) { const auto p = fresnel_integrals(z); return py::make_tuple(p.c, p.s); },
      py::arg("z"));

  // ------------------------------------------------------------ scenario
  m.def(
      "synthesize",
      [](const ArrayGeometry& g, const std::vector<std::tuple<double, double, double, Waveform>>& sources,
         Eigen::Index snapshots, double snr_db, std::uint64_t seed) {
        std::vector<SourceSpec> src;
        for (const auto& [theta, r, power, wf] : sources) src.push_back(SourceSpec{theta, r, power, wf, {}});
        return synthesize_snapshots(g, src, snapshots, snr_db, seed).data;
      },
      py::arg("geometry"), py::arg("sources"), py::arg("snapshots"), py::arg("snr_db"), py::arg("seed"),
      "sources: list of (theta, range, power, waveform); range = inf for a far-field source");
  m.def("sample_covariance", [](const CMat& Y) { return sample_covariance(Y).matrix; }, py::arg("data"));

  // ---------------------------------------------------------------- MUSIC
  m.def(
      "music_2d",
      [](const CMat& R, const ArrayGeometry& g, int K, const std::vector<double>& thetas,
         const std::vector<double>& ranges) {
        const SubspacePair sub = eigendecompose(R, K);
        const Spectrum2D sp = music_spectrum_2d(sub, g, thetas, ranges);
        py::list peaks;
        for (const Peak2D& p : find_peaks(sp, K)) {
          const Peak2D q = refine_peak(sub, g, sp, p);
          peaks.append(py::make_tuple(q.theta, q.range));
        }
        return py::make_tuple(sp.values, peaks);
      },
      py::arg("covariance"), py::arg("geometry"), py::arg("K"), py::arg("thetas"), py::arg("ranges"));
  m.def("default_theta_grid", &default_theta_grid);
  m.def("default_range_grid", &default_range_grid, py::arg("geometry"), py::arg("count") = 200);
  m.def("fbss", [](const CMat& Y, int L, int K) { return fbss(Y, L, K).matrix; }, py::arg("data"),
        py::arg("subarray_len"), py::arg("K") = 0);
  m.def("numerical_rank", &numerical_rank, py::arg("matrix"), py::arg("rel_threshold") = 1e-6);

  // ------------------------------------------------------------ cumulants
  m.def("cumulant_c1", [](const CMat& Y) { return cumulant_c1(Y).matrix; }, py::arg("data"));
  m.def("cumulant_steering", &cumulant_steering, py::arg("num_elements"), py::arg("omega"));
  m.def("electrical_angle", &electrical_angle, py::arg("geometry"), py::arg("theta"));

  // ------------------------------------------------------ polar dictionary
  m.def(
      "polar_dictionary",
      [](const ArrayGeometry& g, double eps) {
        const PolarDictionary d = build_dictionary(g, eps);
        std::vector<std::tuple<double, double, int>> labels;
        for (const auto& l : d.labels) labels.emplace_back(l.theta, l.range, l.ring);
        return py::make_tuple(d.atoms, labels);
      },
      py::arg("geometry"), py::arg("epsilon"));
  m.def(
      "dictionary_coherence",
      [](const ArrayGeometry& g, double eps) {
        py::gil_scoped_release release;
        return coherence(build_dictionary(g, eps)).mu_normalized;
      },
      py::arg("geometry"), py::arg("epsilon"));

  // ------------------------------------------------------------- focusing
  m.def(
      "beam_depth",
      [](const ArrayGeometry& g, double theta_axis, double r0) {
        const BeamDepthResult b = beam_depth(g, theta_axis, r0);
        return py::make_tuple(b.r_bd, b.bd_3db);
      },
      py::arg("geometry"), py::arg("theta_axis"), py::arg("r0"), "returns (r_BD, BD_3dB)");
  m.def("array_gain", &array_gain, py::arg("geometry"), py::arg("theta_axis"), py::arg("r0"), py::arg("r"),
        py::arg("model") = SteeringModel::ExactSpherical);
  m.def("z_3db", &z_3db_exact);

  // -------------------------------------------------------------- squint
  m.def(
      "squint_deviation",
      [](double vartheta, double r, double eta) {
        const SquintDeviation s = squint_deviation(vartheta, r, eta);
        return py::make_tuple(s.delta_theta, s.delta_range);
      },
      py::arg("vartheta"), py::arg("r"), py::arg("eta"));

  // --------------------------------------------------------- beamformers
  m.def("mvdr_weights", [](const CMat& R, const CVec& a) { return mvdr_weights(R, a).w; }, py::arg("covariance"),
        py::arg("steering"));
  m.def(
      "sidelobe_design",
      [](const CVec& yf, const CMat& Y, double delta) {
        SidelobeSolution s;
        {
          py::gil_scoped_release release;
          s = sidelobe_design(SidelobeProblem{yf, Y, delta});
        }
        return py::make_tuple(s.w, s.feasible);
      },
      py::arg("focus_response"), py::arg("sidelobe_responses"), py::arg("delta"),
      "minimum-norm w with w^H yf = 1 and |w^H y_p| <= delta; returns (w, feasible)");
  m.def(
      "point_response",
      [](int N, double pitch, std::array<double, 3> point, double wavelength) {
        return point_response(line_array(N, pitch), point, wavelength);
      },
      py::arg("num_elements"), py::arg("pitch"), py::arg("point"), py::arg("wavelength"));

  // ---------------------------------------------------------------- Wigner
  m.def("wigner_d", &wigner_d, py::arg("l"), py::arg("k"), py::arg("n"), py::arg("cos_theta"));
  m.def("wigner_coefficient_count", &wigner_coefficient_count, py::arg("bandlimit"));
  m.def(
      "wigner_matrix",
      [](int B, int count, std::uint64_t seed) { return build_wigner_matrix(B, random_rotation_samples(count, seed)); },
      py::arg("bandlimit"), py::arg("samples"), py::arg("seed"));
  m.def(
      "phase_retrieve",
      [](const RVec& y, const CMat& A, int restarts, std::uint64_t seed) {
        PhaseRetrievalOptions o;
        o.restarts = restarts;
        o.seed = seed;
        py::gil_scoped_release release;
        return phase_retrieve(y, A, o).alpha;
      },
      py::arg("magnitudes"), py::arg("matrix"), py::arg("restarts") = 20, py::arg("seed") = 0);
  m.def("relative_error_up_to_phase", &relative_error_up_to_phase, py::arg("estimate"), py::arg("truth"));

  // --------------------------------------------------------------- runner
  m.def("experiment_names", &rn::experiment_names);
  m.def(
      "default_config", [](const std::string& name) { return rn::default_config(name).dump(2); }, py::arg("name"));
  m.def(
      "validate", [](const std::string& text) { return rn::validate(rn::parse_config(text, "<python>")).to_string(); },
      py::arg("config_json"));
  m.def("run", &run_json, py::arg("config_json"), "returns (results csv, {auxiliary name: csv})");
}
