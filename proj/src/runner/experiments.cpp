// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numeric>

#include "internal.hpp"
#include "nfkit/beamformers.hpp"
#include "nfkit/coherent.hpp"
#include "nfkit/cumulant.hpp"
#include "nfkit/focusing.hpp"
#include "nfkit/music.hpp"
#include "nfkit/parallel.hpp"
#include "nfkit/polar_omp.hpp"
#include "nfkit/rng.hpp"
#include "nfkit/scenario.hpp"
#include "nfkit/squint.hpp"
#include "nfkit/wigner.hpp"

namespace nfkit::runner::detail {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Row = std::vector<Cell>;

Node root(const ExperimentConfig& c) { return Node(c.document, ""); }
Node root(const Json& doc) { return Node(doc, ""); }

Cell num(double v) { return Cell(v); }
Cell integer(std::int64_t v) { return Cell(v); }
Cell text(std::string s) { return Cell(std::move(s)); }

void warn(Warnings& w, const std::string& path, const std::string& message) {
  w.push_back({Finding::Severity::Warning, path, message});
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count == 1) return {lo};
  for (int i = 0; i < count; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return out;
}

std::vector<double> linspace(double lo, double hi, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(lo + i * step);
  return out;
}

SteeringModel steering_model(const Node& n) {
  return n.choice({"fresnel", "exact"}) == "exact" ? SteeringModel::ExactSpherical
                                                    : SteeringModel::FresnelQuadratic;
}

Waveform waveform(const Node& n) {
  const std::string w = n.choice({"gaussian", "qpsk", "constant-modulus"});
  if (w == "qpsk") return Waveform::QPSK;
  if (w == "constant-modulus") return Waveform::ConstantModulusRandomPhase;
  return Waveform::CircularGaussian;
}

double fraunhofer(const ArrayGeometry& g) { return region_boundaries(g).fraunhofer; }

// Range given as a multiple of the Fraunhofer distance; null => far field.
double range_of(const Node& n, const ArrayGeometry& g) {
  const auto f = n.optional_number();
  if (!f) return kInfiniteRange;
  if (!(*f > 0.0)) n.fail("must be positive (or null for a far-field source)");
  return *f * fraunhofer(g);
}

Json source_entry(double theta_deg, std::optional<double> range_frac, const char* wf) {
  return {{"theta_deg", theta_deg},
          {"range_over_fraunhofer", range_frac ? Json(*range_frac) : Json(nullptr)},
          {"power", 1.0},
          {"waveform", wf}};
}

std::vector<SourceSpec> sources_from(const Node& list, const ArrayGeometry& g) {
  std::vector<SourceSpec> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Node s = list.at(i);
    SourceSpec spec;
    spec.theta = deg2rad(s["theta_deg"].in_range(-90.0, 90.0));
    spec.range = range_of(s["range_over_fraunhofer"], g);
    spec.power = s["power"].positive();
    spec.waveform = waveform(s["waveform"]);
    out.push_back(spec);
  }
  if (out.empty()) list.fail("at least one source is required");
  return out;
}

void warn_outside_radiative(const Node& list, const ArrayGeometry& g, Warnings& w) {
  const RegionBoundaries rb = region_boundaries(g);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Node n = list.at(i)["range_over_fraunhofer"];
    const auto f = n.optional_number();
    if (f && *f * rb.fraunhofer < rb.reactive_limit)
      warn(w, n.path(), "source range " + fmt(*f * rb.fraunhofer) + " m is inside the reactive limit " +
                            fmt(rb.reactive_limit) + " m");
  }
}

// Truth-to-estimate assignment minimizing total cost over all injective maps
// (brute force; source counts here are small). -1 marks an unmatched truth.
std::vector<int> assign(const std::vector<std::vector<double>>& cost, int num_estimates) {
  const int K = static_cast<int>(cost.size());
  const int slots = std::max(K, num_estimates);
  std::vector<int> perm(static_cast<std::size_t>(slots));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best(static_cast<std::size_t>(K), -1);
  double best_cost = std::numeric_limits<double>::infinity();
  int best_matched = -1;
  do {
    double c = 0.0;
    int matched = 0;
    for (int k = 0; k < K; ++k)
      if (perm[k] < num_estimates) {
        c += cost[k][perm[k]];
        ++matched;
      }
    if (matched > best_matched || (matched == best_matched && c < best_cost)) {
      best_matched = matched;
      best_cost = c;
      for (int k = 0; k < K; ++k) best[k] = perm[k] < num_estimates ? perm[k] : -1;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double angle_gap(double a, double b) { return std::abs(a - b); }

// ---------------------------------------------------------------- regions

Json regions_defaults() {
  Json j = skeleton("regions", std::nullopt);
  j["geometry"] = geometry_block({201, std::nullopt, 0.01, 0.5, "first"});
  j["params"] = {{"probe_ranges_m", {1.0, 6.2, 50.0, 200.0, 1000.0}}};
  return j;
}

void regions_check(const Json& doc, Warnings&) {
  geometry_from(root(doc)["geometry"]);
  const Node p = root(doc)["params"]["probe_ranges_m"];
  for (std::size_t i = 0; i < p.size(); ++i) p.at(i).positive();
}

RunResult regions_run(const ExperimentConfig& c) {
  const ArrayGeometry g = geometry_from(root(c)["geometry"]);
  const RegionBoundaries rb = region_boundaries(g);
  ResultTable t({"range_m", "region", "aperture_m", "reactive_limit_m", "fraunhofer_m", "antenna_reactive_m",
                 "max_planar_phase_error_rad"});
  for (double r : root(c)["params"]["probe_ranges_m"].numbers())
    t.add_row({num(r), text(to_string(classify_range(g, r))), num(g.aperture()), num(rb.reactive_limit),
               num(rb.fraunhofer), num(rb.antenna_reactive_inner), num(max_planar_phase_error(g, 0.0, r))});
  return {std::move(t), {}};
}

// ---------------------------------------------------------- wavefront-mse

Json wavefront_defaults() {
  Json j = skeleton("wavefront-mse", std::nullopt);
  j["geometry"] = geometry_block({256, 30e9, std::nullopt, 0.5, "center"});
  j["params"] = {{"carrier_freqs_hz", {3.5e9, 28e9, 100e9}},
                 {"theta_deg", 0.0},
                 {"range_min_m", 1.0},
                 {"range_max_m", 1e5},
                 {"points", 241}};
  return j;
}

ArrayGeometry geometry_at_carrier(const Json& geometry, double fc, const std::string& path) {
  Json g = geometry;
  g["carrier_freq_hz"] = fc;
  g["wavelength_m"] = nullptr;
  return geometry_from(Node(g, path));
}

void wavefront_check(const Json& doc, Warnings&) {
  const Node p = root(doc)["params"];
  const auto freqs = p["carrier_freqs_hz"].numbers();
  if (freqs.empty()) p["carrier_freqs_hz"].fail("at least one carrier is required");
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    p["carrier_freqs_hz"].at(i).positive();
    geometry_at_carrier(doc["geometry"], freqs[i], "/geometry");
  }
  p["theta_deg"].in_range(-90.0, 90.0);
  if (!(p["range_min_m"].positive() < p["range_max_m"].positive()))
    p["range_max_m"].fail("must exceed range_min_m");
  p["points"].at_least(2);
}

RunResult wavefront_run(const ExperimentConfig& c) {
  const Node p = root(c)["params"];
  const double theta = deg2rad(p["theta_deg"].number());
  const std::vector<double> r = logspace(p["range_min_m"].number(), p["range_max_m"].number(), p["points"].integer());
  ResultTable t({"carrier_freq_hz", "range_m", "range_over_fraunhofer", "region", "mse", "max_phase_error_rad"});
  for (double fc : p["carrier_freqs_hz"].numbers()) {
    const ArrayGeometry g = geometry_at_carrier(c.document["geometry"], fc, "/geometry");
    const double dF = fraunhofer(g);
    const auto mse = wavefront_mismatch_mse(g, theta, r);
    for (std::size_t i = 0; i < r.size(); ++i)
      t.add_row({num(fc), num(r[i]), num(r[i] / dF), text(to_string(classify_range(g, r[i]))), num(mse[i].mse),
                 num(max_planar_phase_error(g, theta, r[i]))});
  }
  return {std::move(t), {}};
}

// ---------------------------------------------------------------- music2d

Json music2d_defaults() {
  Json j = skeleton("music2d", 100);
  j["geometry"] = geometry_block({64, 30e9, std::nullopt, 0.5, "center"});
  j["scenario"] = {{"theta_windows_deg", Json::array({Json::array({-50.0, 0.0}), Json::array({10.0, 50.0})})},
                   {"range_window_over_fraunhofer", {0.1, 0.5}},
                   {"snr_db", 20.0},
                   {"snapshots", 1000},
                   {"waveform", "gaussian"},
                   {"model", "fresnel"}};
  j["params"] = {{"theta_step_deg", 0.5}, {"range_points", 200},   {"range_min_m", nullptr},
                 {"range_max_m", nullptr}, {"refine", true},       {"dump_spectrum", false}};
  return j;
}

struct MusicGrids {
  std::vector<double> theta;
  std::vector<double> range;
};

MusicGrids music_grids(const Node& p, const ArrayGeometry& g) {
  const double step = p["theta_step_deg"].in_range(1e-3, 10.0);
  MusicGrids out;
  for (double t : linspace(-90.0, 90.0, step)) out.theta.push_back(deg2rad(t));
  const RegionBoundaries rb = region_boundaries(g);
  const double lo = p["range_min_m"].optional_number().value_or(rb.reactive_limit);
  const double hi = p["range_max_m"].optional_number().value_or(2.0 * rb.fraunhofer);
  if (!(lo > 0.0)) p["range_min_m"].fail("must be positive");
  if (!(hi > lo)) p["range_max_m"].fail("must exceed the lower range limit " + fmt(lo) + " m");
  out.range = logspace(lo, hi, p["range_points"].at_least(2));
  return out;
}

void window_check(const Node& w, double lo_limit, double hi_limit) {
  const auto v = w.numbers();
  if (v.size() != 2) w.fail("expected [low, high]");
  if (!(v[0] >= lo_limit && v[1] <= hi_limit && v[0] <= v[1]))
    w.fail("need " + fmt(lo_limit) + " <= low <= high <= " + fmt(hi_limit));
}

void music2d_check(const Json& doc, Warnings& w) {
  const ArrayGeometry g = geometry_from(root(doc)["geometry"]);
  const Node s = root(doc)["scenario"];
  const Node wins = s["theta_windows_deg"];
  const int K = static_cast<int>(wins.size());
  if (K < 1) wins.fail("at least one source window is required");
  if (K >= g.num_elements()) wins.fail("MUSIC needs fewer sources than elements");
  for (int k = 0; k < K; ++k) window_check(wins.at(k), -90.0, 90.0);
  window_check(s["range_window_over_fraunhofer"], 0.0, 1e6);
  if (!(s["range_window_over_fraunhofer"].at(0).number() > 0.0))
    s["range_window_over_fraunhofer"].at(0).fail("must be positive");
  s["snapshots"].at_least(1);
  waveform(s["waveform"]);
  steering_model(s["model"]);
  const Node p = root(doc)["params"];
  const MusicGrids grids = music_grids(p, g);
  const RegionBoundaries rb = region_boundaries(g);
  if (grids.range.front() < rb.reactive_limit)
    warn(w, "/params/range_min_m",
         "range grid starts at " + fmt(grids.range.front()) + " m, inside the reactive limit " +
             fmt(rb.reactive_limit) + " m where the Fresnel model is inaccurate");
  const double src_lo = s["range_window_over_fraunhofer"].at(0).number() * rb.fraunhofer;
  const double src_hi = s["range_window_over_fraunhofer"].at(1).number() * rb.fraunhofer;
  if (src_lo < grids.range.front() || src_hi > grids.range.back())
    warn(w, "/scenario/range_window_over_fraunhofer",
         "source ranges [" + fmt(src_lo) + ", " + fmt(src_hi) + "] m are not covered by the range grid [" +
             fmt(grids.range.front()) + ", " + fmt(grids.range.back()) + "] m");
  if (src_lo < rb.reactive_limit)
    warn(w, "/scenario/range_window_over_fraunhofer",
         "sources may fall inside the reactive limit " + fmt(rb.reactive_limit) + " m");
}

struct MusicTrial {
  std::vector<Row> rows;
  std::optional<ResultTable> spectrum;
};

RunResult music2d_run(const ExperimentConfig& c) {
  const ArrayGeometry g = geometry_from(root(c)["geometry"]);
  const Node s = root(c)["scenario"];
  const Node p = root(c)["params"];
  const MusicGrids grids = music_grids(p, g);
  const double dF = fraunhofer(g);
  const int K = static_cast<int>(s["theta_windows_deg"].size());
  const int T = s["snapshots"].integer();
  const double snr = s["snr_db"].number();
  const Waveform wf = waveform(s["waveform"]);
  SynthesisOptions synth;
  synth.near_field_model = steering_model(s["model"]);
  const bool refine = p["refine"].boolean();
  const bool dump = p["dump_spectrum"].boolean();
  const auto rwin = s["range_window_over_fraunhofer"].numbers();

  auto trial = [&](int t) {
    const std::uint64_t seed = trial_seed(c, t);
    RandomStream place(seed, {stream_tag("placement")});
    std::vector<SourceSpec> src;
    for (int k = 0; k < K; ++k) {
      const auto w = s["theta_windows_deg"].at(k).numbers();
      SourceSpec sp;
      sp.theta = deg2rad(place.uniform(w[0], w[1]));
      sp.range = place.uniform(rwin[0], rwin[1]) * dF;
      sp.waveform = wf;
      src.push_back(sp);
    }
    const SnapshotSet snaps = synthesize_snapshots(g, src, T, snr, derive_seed(seed, {stream_tag("snapshots")}), synth);
    const SubspacePair sub = eigendecompose(sample_covariance(snaps), K);
    Spectrum2D spec = music_spectrum_2d(sub, g, grids.theta, grids.range);
    MusicTrial out;
    std::vector<Peak2D> peaks;
    std::string status = "ok";
    try {
      peaks = find_peaks(spec, K);
    } catch (const PeakShortageError& e) {
      status = "peak-shortage";
      for (const auto& [th, r] : e.found()) peaks.push_back({th, r, 0.0, 0, 0});
    }
    if (refine && status == "ok")
      for (Peak2D& pk : peaks) pk = refine_peak(sub, g, spec, pk);
    std::vector<std::vector<double>> cost(K, std::vector<double>(peaks.size()));
    for (int k = 0; k < K; ++k)
      for (std::size_t e = 0; e < peaks.size(); ++e) cost[k][e] = angle_gap(src[k].theta, peaks[e].theta);
    const std::vector<int> match = assign(cost, static_cast<int>(peaks.size()));
    for (int k = 0; k < K; ++k) {
      const double th = match[k] >= 0 ? peaks[match[k]].theta : kNaN;
      const double r = match[k] >= 0 ? peaks[match[k]].range : kNaN;
      out.rows.push_back({integer(t), integer(k), num(rad2deg(src[k].theta)), num(src[k].range), num(rad2deg(th)),
                          num(r), num(rad2deg(th - src[k].theta)), num((r - src[k].range) / src[k].range),
                          text(match[k] >= 0 ? status : "missing")});
    }
    if (dump && t == 0) {
      ResultTable st({"theta_deg", "range_m", "value"});
      for (std::size_t i = 0; i < spec.theta_grid.size(); ++i)
        for (std::size_t j = 0; j < spec.range_grid.size(); ++j)
          st.add_row({num(rad2deg(spec.theta_grid[i])), num(spec.range_grid[j]),
                      num(spec.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
      out.spectrum = std::move(st);
    }
    return out;
  };

  auto results = parallel_map(root(c)["trials"].integer(), c.workers, trial);
  RunResult res{ResultTable({"trial", "source", "theta_true_deg", "range_true_m", "theta_hat_deg", "range_hat_m",
                             "theta_err_deg", "range_rel_err", "status"}),
                {}};
  for (auto& r : results) {
    for (auto& row : r.rows) res.table.add_row(std::move(row));
    if (r.spectrum) res.auxiliary.emplace("spectrum", std::move(*r.spectrum));
  }
  return res;
}

// --------------------------------------------------------- mixed-cumulant

Json mixed_defaults() {
  Json j = skeleton("mixed-cumulant", 100);
  j["geometry"] = geometry_block({33, 30e9, std::nullopt, 0.25, "center"});
  j["scenario"] = {{"sources", Json::array({source_entry(15.0, std::nullopt, "qpsk"), source_entry(-20.0, 0.3, "qpsk")})},
                   {"snr_db", 20.0},
                   {"snapshots", 2000},
                   {"model", "fresnel"}};
  j["params"] = {{"omega_points", 721},
                 {"kappa_points", 400},
                 {"ff_kappa_threshold", nullptr},
                 {"peak_floor_db", 10.0}};
  return j;
}

void mixed_check(const Json& doc, Warnings& w) {
  const ArrayGeometry g = geometry_from(root(doc)["geometry"]);
  if (!g.is_symmetric())
    root(doc)["geometry"].fail("the cumulant method needs an odd element count with phase_reference \"center\"");
  const Node s = root(doc)["scenario"];
  const auto src = sources_from(s["sources"], g);
  if (static_cast<int>(src.size()) >= g.num_elements()) s["sources"].fail("need fewer sources than elements");
  for (std::size_t i = 0; i < src.size(); ++i)
    if (src[i].waveform == Waveform::CircularGaussian)
      warn(w, s["sources"].at(i)["waveform"].path(),
           "Gaussian sources have zero fourth-order cumulant and are invisible to C1");
  warn_outside_radiative(s["sources"], g, w);
  s["snapshots"].at_least(1);
  steering_model(s["model"]);
  const Node p = root(doc)["params"];
  p["omega_points"].at_least(3);
  p["kappa_points"].at_least(2);
  if (const auto th = p["ff_kappa_threshold"].optional_number(); th && !(*th > 0.0))
    p["ff_kappa_threshold"].fail("must be positive");
}

RunResult mixed_run(const ExperimentConfig& c) {
  const ArrayGeometry g = geometry_from(root(c)["geometry"]);
  const Node s = root(c)["scenario"];
  const Node p = root(c)["params"];
  const std::vector<SourceSpec> src = sources_from(s["sources"], g);
  const int K = static_cast<int>(src.size());
  const int T = s["snapshots"].integer();
  const double snr = s["snr_db"].number();
  SynthesisOptions synth;
  synth.near_field_model = steering_model(s["model"]);
  const std::vector<double> omega_grid = default_omega_grid(g, p["omega_points"].integer());
  const std::vector<double> kappa_grid = default_kappa_grid(g, p["kappa_points"].integer());
  KappaSearchOptions ko;
  ko.ff_threshold = p["ff_kappa_threshold"].optional_number();
  ko.peak_floor_db = p["peak_floor_db"].number();

  auto trial = [&](int t) {
    const std::uint64_t seed = trial_seed(c, t);
    const SnapshotSet snaps = synthesize_snapshots(g, src, T, snr, derive_seed(seed, {stream_tag("snapshots")}), synth);
    std::vector<MixedSourceEstimate> est;
    std::string status = "ok";
    try {
      const std::vector<double> omegas = music_omega(cumulant_c1(snaps), K, omega_grid);
      KappaSearchResult ks = kappa_search(sample_covariance(snaps), g, K, omegas, kappa_grid, ko);
      est = std::move(ks.estimates);
      if (!ks.failures.empty()) status = "kappa-failure";
    } catch (const PeakShortageError&) {
      status = "omega-peak-shortage";
    }
    std::vector<std::vector<double>> cost(K, std::vector<double>(est.size()));
    for (int k = 0; k < K; ++k)
      for (std::size_t e = 0; e < est.size(); ++e) cost[k][e] = std::abs(electrical_angle(g, src[k].theta) - est[e].omega);
    const std::vector<int> match = assign(cost, static_cast<int>(est.size()));
    std::vector<Row> rows;
    for (int k = 0; k < K; ++k) {
      const bool have = match[k] >= 0;
      const MixedSourceEstimate* e = have ? &est[match[k]] : nullptr;
      const bool ff_hat = have && e->far_field;
      const bool ok = have && ff_hat == src[k].far_field();
      const double r_hat = have ? e->range : kNaN;
      const double rel = (have && !src[k].far_field() && !ff_hat) ? (r_hat - src[k].range) / src[k].range : kNaN;
      rows.push_back({integer(t), integer(k), num(rad2deg(src[k].theta)), num(src[k].range),
                      integer(src[k].far_field()), num(have ? rad2deg(e->theta) : kNaN), num(r_hat),
                      integer(have ? static_cast<int>(ff_hat) : -1), integer(ok), num(rel),
                      text(have ? status : "missing")});
    }
    return rows;
  };

  auto results = parallel_map(root(c)["trials"].integer(), c.workers, trial);
  ResultTable t({"trial", "source", "theta_true_deg", "range_true_m", "far_field_true", "theta_hat_deg",
                 "range_hat_m", "far_field_hat", "classification_ok", "range_rel_err", "status"});
  for (auto& rows : results)
    for (auto& row : rows) t.add_row(std::move(row));
  return {std::move(t), {}};
}

// --------------------------------------------------------------- coherent

Json coherent_defaults() {
  Json j = skeleton("coherent", 20);
  j["geometry"] = geometry_block({32, 30e9, std::nullopt, 0.5, "center"});
  j["scenario"] = {{"ff_theta_deg", 10.0},
                   {"nf_copies", Json::array({Json{{"theta_deg", -25.0},
                                                   {"range_over_fraunhofer", 0.15},
                                                   {"gain_re", 0.8},
                                                   {"gain_im", 0.3}}})},
                   {"snr_db", 20.0},
                   {"snapshots", 500},
                   {"waveform", "gaussian"}};
  j["params"] = {{"calibration_angles", 181}, {"calibration_snr_db", nullptr}, {"fbss_len", nullptr},
                 {"ring_range_m", nullptr},   {"range_epsilon", 0.1}};
  return j;
}

struct CoherentSetup {
  ArrayGeometry geometry;
  std::vector<SourceSpec> sources;  // master first
  std::vector<SourceSpec> disturbances;
  int fbss_len;
  int calibration_angles;
  std::optional<double> calibration_snr_db;
  std::optional<double> ring_range;
  double epsilon;
};

CoherentSetup coherent_setup(const Json& doc) {
  const ArrayGeometry g = geometry_from(root(doc)["geometry"]);
  const Node s = root(doc)["scenario"];
  const Node p = root(doc)["params"];
  CoherentSetup out{g, {}, {}, 0, 0, {}, {}, 0.0};
  SourceSpec master;
  master.theta = deg2rad(s["ff_theta_deg"].in_range(-90.0, 90.0));
  master.waveform = waveform(s["waveform"]);
  out.sources.push_back(master);
  const Node copies = s["nf_copies"];
  if (copies.size() < 1) copies.fail("at least one near-field copy is required");
  for (std::size_t i = 0; i < copies.size(); ++i) {
    const Node e = copies.at(i);
    SourceSpec d;
    d.theta = deg2rad(e["theta_deg"].in_range(-90.0, 90.0));
    d.range = range_of(e["range_over_fraunhofer"], g);
    if (std::isinf(d.range)) e["range_over_fraunhofer"].fail("near-field copies need a finite range");
    d.coherence = Coherence{0, cdouble(e["gain_re"].number(), e["gain_im"].number())};
    out.sources.push_back(d);
    out.disturbances.push_back(d);
  }
  const int N = g.num_elements();
  const int K_total = static_cast<int>(copies.size()) + 1;
  out.fbss_len = p["fbss_len"].optional_integer().value_or(static_cast<int>(std::lround(0.75 * N)));
  if (out.fbss_len <= K_total || out.fbss_len > N - K_total + 1)
    p["fbss_len"].fail("subarray length " + std::to_string(out.fbss_len) + " must lie in [" +
                       std::to_string(K_total + 1) + ", " + std::to_string(N - K_total + 1) + "]");
  out.calibration_angles = p["calibration_angles"].at_least(2);
  out.calibration_snr_db = p["calibration_snr_db"].optional_number();
  out.ring_range = p["ring_range_m"].optional_number();
  if (out.ring_range && !(*out.ring_range > 0.0)) p["ring_range_m"].fail("must be positive");
  out.epsilon = p["range_epsilon"].positive();
  s["snapshots"].at_least(1);
  return out;
}

void coherent_check(const Json& doc, Warnings& w) {
  const CoherentSetup cs = coherent_setup(doc);
  warn_outside_radiative(root(doc)["scenario"]["nf_copies"], cs.geometry, w);
}

RunResult coherent_run(const ExperimentConfig& c) {
  const CoherentSetup cs = coherent_setup(c.document);
  const Node s = root(c)["scenario"];
  const ArrayGeometry& g = cs.geometry;
  const std::uint64_t cal_seed = derive_seed(c.seed, {stream_tag(c.experiment), stream_tag("calibration")});
  const CalibrationTable calib =
      build_calibration(g, cs.calibration_angles, cs.disturbances, cal_seed,
                        cs.calibration_snr_db.value_or(std::numeric_limits<double>::infinity()));
  const NftMatrix nft = build_nft(g, calib.angles, cs.ring_range.value_or(default_ring_range(g)));
  CoherentOptions opt;
  opt.range_epsilon = cs.epsilon;
  const int T = s["snapshots"].integer();
  const double snr = s["snr_db"].number();
  const int K_N = static_cast<int>(cs.disturbances.size());

  auto trial = [&](int t) {
    const SnapshotSet snaps =
        synthesize_snapshots(g, cs.sources, T, snr, derive_seed(trial_seed(c, t), {stream_tag("snapshots")}));
    std::vector<Row> rows;
    CoherentResult r{};
    std::string status = "ok";
    try {
      r = resolve_coherent_mixture(snaps, calib, nft, cs.fbss_len, K_N, opt);
    } catch (const StageError& e) {
      status = "failed:" + e.stage();
      r.ff_theta = kNaN;
    }
    const double th0 = cs.sources[0].theta;
    rows.push_back({integer(t), text("ff"), num(rad2deg(th0)), num(rad2deg(r.ff_theta)), num(kInfiniteRange),
                    num(kInfiniteRange), num(1.0), num(0.0), num(kNaN), num(kNaN), text(status)});
    std::vector<std::vector<double>> cost(K_N, std::vector<double>(r.near_field.size()));
    for (int k = 0; k < K_N; ++k)
      for (std::size_t e = 0; e < r.near_field.size(); ++e)
        cost[k][e] = angle_gap(cs.disturbances[k].theta, r.near_field[e].theta);
    const std::vector<int> match = assign(cost, static_cast<int>(r.near_field.size()));
    for (int k = 0; k < K_N; ++k) {
      const SourceSpec& d = cs.disturbances[k];
      const bool have = match[k] >= 0;
      const NfEstimate e = have ? r.near_field[match[k]] : NfEstimate{kNaN, kNaN, cdouble(kNaN, kNaN)};
      rows.push_back({integer(t), text("nf" + std::to_string(k + 1)), num(rad2deg(d.theta)), num(rad2deg(e.theta)),
                      num(d.range), num(e.range), num(d.coherence->gain.real()), num(d.coherence->gain.imag()),
                      num(e.gain.real()), num(e.gain.imag()), text(have ? status : (status == "ok" ? "missing" : status))});
    }
    return rows;
  };

  auto results = parallel_map(root(c)["trials"].integer(), c.workers, trial);
  ResultTable t({"trial", "path", "theta_true_deg", "theta_hat_deg", "range_true_m", "range_hat_m", "gain_true_re",
                 "gain_true_im", "gain_hat_re", "gain_hat_im", "status"});
  for (auto& rows : results)
    for (auto& row : rows) t.add_row(std::move(row));
  return {std::move(t), {}};
}

// ----------------------------------------------------------- chanest-nmse

Json chanest_defaults() {
  Json j = skeleton("chanest-nmse", 200);
  j["geometry"] = geometry_block({256, 30e9, std::nullopt, 0.5, "center"});
  j["scenario"] = {{"num_paths", 3},
                   {"on_grid", true},
                   {"grid_epsilon", 2.0},
                   {"theta_max_deg", 60.0},
                   {"range_window_over_fraunhofer", {0.05, 0.5}},
                   {"snr_db", 10.0},
                   {"num_rf", 8}};
  j["params"] = {{"pilot_lengths", {40, 48, 64, 96, 128}},
                 {"epsilons", {1.0, 2.0}},
                 {"r_min_m", nullptr},
                 {"sparsity", nullptr}};
  return j;
}

double chanest_r_min(const Json& doc, const ArrayGeometry& g) {
  return root(doc)["params"]["r_min_m"].optional_number().value_or(region_boundaries(g).reactive_limit);
}

void chanest_check(const Json& doc, Warnings& w) {
  const ArrayGeometry g = geometry_from(root(doc)["geometry"]);
  const Node s = root(doc)["scenario"];
  const Node p = root(doc)["params"];
  s["num_paths"].at_least(1);
  s["grid_epsilon"].positive();
  s["theta_max_deg"].in_range(0.0, 90.0);
  window_check(s["range_window_over_fraunhofer"], 0.0, 1e6);
  s["num_rf"].at_least(1);
  const Node pl = p["pilot_lengths"];
  if (pl.size() < 1) pl.fail("at least one pilot length is required");
  for (std::size_t i = 0; i < pl.size(); ++i) pl.at(i).at_least(1);
  const Node eps = p["epsilons"];
  for (std::size_t i = 0; i < eps.size(); ++i) eps.at(i).positive();
  const double r_min = chanest_r_min(doc, g);
  if (!(r_min > 0.0)) p["r_min_m"].fail("must be positive");
  if (const auto k = p["sparsity"].optional_integer(); k && *k < 1) p["sparsity"].fail("must be at least 1");
  const double rl = region_boundaries(g).reactive_limit;
  if (r_min < rl)
    warn(w, "/params/r_min_m",
         "r_min " + fmt(r_min) + " m is below the reactive limit " + fmt(rl) + " m; the Fresnel dictionary is "
         "inaccurate there");
}

RunResult chanest_run(const ExperimentConfig& c) {
  const ArrayGeometry g = geometry_from(root(c)["geometry"]);
  const Node s = root(c)["scenario"];
  const Node p = root(c)["params"];
  const int L = s["num_paths"].integer();
  const bool on_grid = s["on_grid"].boolean();
  const double theta_max = deg2rad(s["theta_max_deg"].number());
  const auto rwin = s["range_window_over_fraunhofer"].numbers();
  const double snr = s["snr_db"].number();
  const int num_rf = s["num_rf"].integer();
  const std::vector<int> pilots = p["pilot_lengths"].integers();
  const std::vector<double> eps = p["epsilons"].numbers();
  const double r_min = chanest_r_min(c.document, g);
  OmpOptions omp;
  omp.sparsity = p["sparsity"].optional_integer().value_or(L);

  std::vector<PolarDictionary> dicts;
  for (double e : eps) dicts.push_back(build_dictionary(g, e, r_min));
  const PolarDictionary truth_dict = build_dictionary(g, s["grid_epsilon"].number(), r_min);
  std::vector<std::size_t> eligible;
  for (std::size_t q = 0; q < truth_dict.labels.size(); ++q)
    if (std::abs(truth_dict.labels[q].theta) <= theta_max + 1e-12) eligible.push_back(q);
  if (on_grid && eligible.empty()) s["theta_max_deg"].fail("no grid atoms within the angle limit");
  const double dF = fraunhofer(g);
  const int N = g.num_elements();
  const std::size_t P = pilots.size(), E = eps.size();

  // Per trial: [pilot][0] = LS, [pilot][1 + e] = OMP with epsilon e.
  auto trial = [&](int t) {
    const std::uint64_t seed = trial_seed(c, t);
    RandomStream rng(seed, {stream_tag("channel")});
    ChannelSpec spec;
    for (int l = 0; l < L; ++l) {
      ChannelPath path;
      path.alpha = rng.complex_normal(1.0);
      if (on_grid) {
        const AtomLabel& a = truth_dict.labels[eligible[rng.index(eligible.size())]];
        path.theta = a.theta;
        path.range = a.range;
      } else {
        path.theta = rng.uniform(-theta_max, theta_max);
        path.range = rng.uniform(rwin[0], rwin[1]) * dF;
      }
      spec.paths.push_back(path);
    }
    const CVec h = synthesize_channel(g, spec);
    std::vector<std::vector<double>> out(P, std::vector<double>(E + 1));
    for (std::size_t i = 0; i < P; ++i) {
      const PilotSetup setup =
          make_pilot_setup(N, num_rf, pilots[i], snr, derive_seed(seed, {stream_tag("pilot"), static_cast<std::uint64_t>(i)}));
      const CVec y = observe_pilot(h, setup);
      out[i][0] = nmse(ls_estimate(y, setup), h);
      for (std::size_t e = 0; e < E; ++e) out[i][e + 1] = nmse(omp_estimate(y, setup, dicts[e], omp).h_hat, h);
    }
    return out;
  };

  const int trials = root(c)["trials"].integer();
  auto results = parallel_map(trials, c.workers, trial);
  ResultTable t({"pilot_len", "measurements", "estimator", "epsilon", "nmse", "nmse_db", "nmse_ci95", "trials"});
  for (std::size_t i = 0; i < P; ++i) {
    for (std::size_t e = 0; e <= E; ++e) {
      double sum = 0.0, sum2 = 0.0;
      for (const auto& r : results) {
        sum += r[i][e];
        sum2 += r[i][e] * r[i][e];
      }
      const double mean = sum / trials;
      const double var = trials > 1 ? std::max(0.0, (sum2 - trials * mean * mean) / (trials - 1)) : 0.0;
      t.add_row({integer(pilots[i]), integer(static_cast<std::int64_t>(pilots[i]) * num_rf), text(e == 0 ? "ls" : "omp"),
                 num(e == 0 ? kNaN : eps[e - 1]), num(mean), num(lin2db(mean)), num(1.96 * std::sqrt(var / trials)),
                 integer(trials)});
    }
  }
  return {std::move(t), {}};
}

// ----------------------------------------------------------- se-multiplex

Json multiplex_defaults() {
  Json j = skeleton("se-multiplex", 200);
  j["geometry"] = {{"num_elements", 512}, {"carrier_freq_hz", 30e9}};
  j["params"] = {{"user_power_w", 0.2},      {"noise_power_dbm", -87.0},
                 {"theta_broadside_deg", 0.0}, {"range_min_m", 20.0},
                 {"range_max_m", 500.0},     {"user_counts", {1, 2, 4, 6, 8, 10}},
                 {"path_loss", "free-space"}};
  return j;
}

MultiplexConfig multiplex_config(const Json& doc) {
  const Node g = root(doc)["geometry"];
  const Node p = root(doc)["params"];
  MultiplexConfig m;
  m.num_elements = g["num_elements"].at_least(2);
  m.carrier_freq = g["carrier_freq_hz"].positive();
  m.user_power = p["user_power_w"].positive();
  m.noise_power_dbm = p["noise_power_dbm"].number();
  m.theta_axis = kPi / 2.0 - deg2rad(p["theta_broadside_deg"].in_range(-90.0, 90.0));
  m.r_min = p["range_min_m"].positive();
  m.r_max = p["range_max_m"].positive();
  if (!(m.r_max >= m.r_min)) p["range_max_m"].fail("must be at least range_min_m");
  m.user_counts = p["user_counts"].integers();
  if (m.user_counts.empty()) p["user_counts"].fail("at least one user count is required");
  for (std::size_t i = 0; i < m.user_counts.size(); ++i) p["user_counts"].at(i).at_least(1);
  m.path_loss = p["path_loss"].choice({"unit", "free-space"}) == "unit" ? PathLoss::Unit : PathLoss::FreeSpace;
  m.drops = root(doc)["trials"].at_least(1);
  return m;
}

void multiplex_check(const Json& doc, Warnings&) { multiplex_config(doc); }

RunResult multiplex_run(const ExperimentConfig& c) {
  MultiplexConfig m = multiplex_config(c.document);
  m.seed = c.seed;
  ResultTable t({"K", "exact_se_avg", "mismatched_se_avg", "drops"});
  for (int K : m.user_counts) {
    auto drops = parallel_map(m.drops, c.workers, [&](int d) { return multiplex_drop(m, K, d); });
    double ex = 0.0, mm = 0.0;
    for (const auto& [a, b] : drops) {
      ex += a;
      mm += b;
    }
    t.add_row({integer(K), num(ex / m.drops), num(mm / m.drops), integer(m.drops)});
  }
  return {std::move(t), {}};
}

// -------------------------------------------------------------- beamdepth

Json beamdepth_defaults() {
  Json j = skeleton("beamdepth", std::nullopt);
  j["geometry"] = geometry_block({512, 30e9, std::nullopt, 0.5, "center"});
  j["params"] = {{"theta_axis_deg", {30.0, 60.0, 90.0}},
                 {"r0_over_rbd", {0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0, 1.5}},
                 {"z_3db", "exact"},
                 {"level", 0.5}};
  return j;
}

void beamdepth_check(const Json& doc, Warnings&) {
  geometry_from(root(doc)["geometry"]);
  const Node p = root(doc)["params"];
  const Node th = p["theta_axis_deg"];
  for (std::size_t i = 0; i < th.size(); ++i) th.at(i).in_range(0.0, 180.0);
  const Node r = p["r0_over_rbd"];
  for (std::size_t i = 0; i < r.size(); ++i) r.at(i).positive();
  p["z_3db"].choice({"exact", "nominal"});
  p["level"].in_range(1e-6, 1.0 - 1e-6);
}

RunResult beamdepth_run(const ExperimentConfig& c) {
  const ArrayGeometry g = geometry_from(root(c)["geometry"]);
  const Node p = root(c)["params"];
  const double z = p["z_3db"].string() == "nominal" ? kZ3dBNominal : z_3db_exact();
  const double level = p["level"].number();
  ResultTable t({"theta_axis_deg", "r0_over_rbd", "r0_m", "r_bd_m", "bd_closed_m", "bd_numeric_m", "r_lo_m",
                 "r_hi_m", "rel_diff"});
  for (double th_deg : p["theta_axis_deg"].numbers()) {
    const double th = deg2rad(th_deg);
    const double r_bd = beam_depth(g, th, 1.0, z).r_bd;
    for (double f : p["r0_over_rbd"].numbers()) {
      const double r0 = f * r_bd;
      if (!(r0 > 0.0)) {
        t.add_row({num(th_deg), num(f), num(r0), num(r_bd), num(kInfiniteRange), num(kInfiniteRange), num(kNaN),
                   num(kNaN), num(kNaN)});
        continue;
      }
      const BeamDepthResult bd = beam_depth(g, th, r0, z);
      const NumericalBeamDepth nb = numerical_beam_depth(g, th, r0, level);
      const double rel = std::isfinite(bd.bd_3db) && std::isfinite(nb.width) ? std::abs(bd.bd_3db - nb.width) / nb.width
                                                                            : kNaN;
      t.add_row({num(th_deg), num(f), num(r0), num(bd.r_bd), num(bd.bd_3db), num(nb.width), num(nb.r_lo),
                 num(nb.r_hi), num(rel)});
    }
  }
  return {std::move(t), {}};
}

// ----------------------------------------------------------------- squint

Json squint_defaults() {
  Json j = skeleton("squint", std::nullopt);
  j["geometry"] = geometry_block({256, 300e9, std::nullopt, 0.5, "center"});
  j["params"] = {{"bandwidth_hz", 30e9},
                 {"subcarriers", 5},
                 {"vartheta0", {0.1, 0.5, 0.9}},
                 {"r0_m", {0.5, 1.0, 2.0}},
                 {"vartheta_step_cells", 0.25},
                 {"vartheta_halfspan", nullptr},
                 {"range_lo_factor", 0.05},
                 {"range_hi_factor", 3.0},
                 {"range_step_factor", 0.01},
                 {"dump_beampattern", false}};
  return j;
}

void squint_check(const Json& doc, Warnings& w) {
  const ArrayGeometry g = geometry_from(root(doc)["geometry"]);
  if (g.phase_reference() != g.center_index())
    warn(w, "/geometry/phase_reference",
         "with a non-centred reference the angle and range drifts couple and the closed-form deviation does not "
         "locate the peak");
  const Node p = root(doc)["params"];
  make_wideband_grid(g.carrier_freq(), p["bandwidth_hz"].in_range(0.0, 2.0 * g.carrier_freq()),
                     p["subcarriers"].at_least(1));
  const Node v = p["vartheta0"];
  for (std::size_t i = 0; i < v.size(); ++i) v.at(i).in_range(-0.999, 0.999);
  const Node r = p["r0_m"];
  for (std::size_t i = 0; i < r.size(); ++i) r.at(i).positive();
  p["vartheta_step_cells"].positive();
  if (const auto h = p["vartheta_halfspan"].optional_number(); h && !(*h > 0.0 && *h <= 2.0))
    p["vartheta_halfspan"].fail("must be in (0, 2]");
  const double lo = p["range_lo_factor"].positive(), hi = p["range_hi_factor"].positive();
  if (!(hi > lo)) p["range_hi_factor"].fail("must exceed range_lo_factor");
  p["range_step_factor"].positive();
}

RunResult squint_run(const ExperimentConfig& c) {
  const ArrayGeometry g = geometry_from(root(c)["geometry"]);
  const Node p = root(c)["params"];
  const WidebandGrid wb =
      make_wideband_grid(g.carrier_freq(), p["bandwidth_hz"].number(), p["subcarriers"].integer());
  const double vstep = p["vartheta_step_cells"].number() * 2.0 / g.num_elements();
  const std::optional<double> half_fixed = p["vartheta_halfspan"].optional_number();
  const double lo = p["range_lo_factor"].number(), hi = p["range_hi_factor"].number();
  const double rstep = p["range_step_factor"].number();
  const bool dump = p["dump_beampattern"].boolean();

  struct Job {
    double v0, r0;
    std::size_t m;
  };
  std::vector<Job> jobs;
  for (double v0 : p["vartheta0"].numbers())
    for (double r0 : p["r0_m"].numbers())
      for (std::size_t m = 0; m < wb.freqs.size(); ++m) jobs.push_back({v0, r0, m});

  auto eval = [&](int i) {
    const Job& j = jobs[static_cast<std::size_t>(i)];
    std::vector<double> vg, rg;
    // Both grids contain the target exactly.
    // Default window: the largest predicted angular drift over the band, plus a margin.
    double half = 0.0;
    if (half_fixed) {
      half = *half_fixed;
    } else {
      for (double eta : wb.eta) half = std::max(half, std::abs(squint_deviation(j.v0, j.r0, eta).delta_theta));
      half += 0.02;
    }
    const int nv = static_cast<int>(std::floor(half / vstep + 1e-9));
    for (int k = -nv; k <= nv; ++k)
      if (std::abs(j.v0 + k * vstep) < 1.0) vg.push_back(j.v0 + k * vstep);
    const int r_lo = static_cast<int>(std::ceil((lo - 1.0) / rstep - 1e-9));
    const int r_hi = static_cast<int>(std::floor((hi - 1.0) / rstep + 1e-9));
    for (int k = r_lo; k <= r_hi; ++k) rg.push_back(j.r0 * (1.0 + k * rstep));
    const Beampattern bp = wideband_beampattern(g, matched_beam(g, j.v0, j.r0), vg, rg, wb.freqs[j.m]);
    return bp;
  };
  auto patterns = parallel_map(static_cast<int>(jobs.size()), c.workers, eval);

  RunResult res{ResultTable({"vartheta0", "r0_m", "f_m_hz", "eta", "pred_vartheta", "pred_range_m", "peak_vartheta",
                             "peak_range_m", "vartheta_cells_off", "range_cells_off", "peak_gain",
                             "pred_angle_dev_deg"}),
                {}};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& j = jobs[i];
    const Beampattern& bp = patterns[i];
    const double eta = wb.eta[j.m];
    const SquintDeviation dev = squint_deviation(j.v0, j.r0, eta);
    const double pv = j.v0 + dev.delta_theta, pr = j.r0 + dev.delta_range;
    const double dev_deg = std::abs(pv) < 1.0 ? rad2deg(std::asin(pv) - std::asin(j.v0)) : kNaN;
    res.table.add_row({num(j.v0), num(j.r0), num(wb.freqs[j.m]), num(eta), num(pv), num(pr), num(bp.peak_vartheta),
                       num(bp.peak_range), num((bp.peak_vartheta - pv) / vstep), num((bp.peak_range - pr) / (rstep * j.r0)),
                       num(bp.peak_gain), num(dev_deg)});
  }
  if (dump && !jobs.empty()) {
    const std::size_t edge = wb.freqs.size() - 1;  // first target, highest subcarrier
    const Beampattern& bp = patterns[edge];
    ResultTable t({"vartheta", "range_m", "gain"});
    for (std::size_t a = 0; a < bp.vartheta_grid.size(); ++a)
      for (std::size_t b = 0; b < bp.range_grid.size(); ++b)
        t.add_row({num(bp.vartheta_grid[a]), num(bp.range_grid[b]),
                   num(bp.gain(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)))});
    res.auxiliary.emplace("beampattern", std::move(t));
  }
  return res;
}

// ------------------------------------------------------------------- mvdr

Json mvdr_defaults() {
  Json j = skeleton("mvdr", 50);
  j["geometry"] = geometry_block({16, 30e9, std::nullopt, 0.5, "center"});
  j["scenario"] = {{"source", source_entry(0.0, 0.2, "gaussian")},
                   {"interferer", source_entry(30.0, std::nullopt, "gaussian")},
                   {"snr_db", 0.0},
                   {"inr_db", 30.0},
                   {"snapshots", 1000},
                   {"model", "fresnel"}};
  j["params"] = {{"presumed_model", "fresnel"}};
  return j;
}

struct MvdrScene {
  ArrayGeometry geometry;
  std::vector<SourceSpec> sources;
  double noise_var;
};

MvdrScene mvdr_scene(const Json& doc) {
  const ArrayGeometry g = geometry_from(root(doc)["geometry"]);
  const Node s = root(doc)["scenario"];
  auto one = [&](const Node& n) {
    SourceSpec sp;
    sp.theta = deg2rad(n["theta_deg"].in_range(-90.0, 90.0));
    sp.range = range_of(n["range_over_fraunhofer"], g);
    sp.waveform = waveform(n["waveform"]);
    return sp;
  };
  const double snr = s["snr_db"].number();
  const double inr = s["inr_db"].number();
  SourceSpec src = one(s["source"]);
  SourceSpec itf = one(s["interferer"]);
  src.power = 1.0;
  itf.power = db2lin(inr - snr);  // noise variance is 10^(-snr/10)
  s["snapshots"].at_least(1);
  steering_model(s["model"]);
  steering_model(root(doc)["params"]["presumed_model"]);
  return {g, {src, itf}, noise_variance_for_snr(snr)};
}

void mvdr_check(const Json& doc, Warnings& w) {
  const MvdrScene sc = mvdr_scene(doc);
  const Node s = root(doc)["scenario"];
  if (s["source"]["power"].number() != 1.0 || s["interferer"]["power"].number() != 1.0)
    warn(w, "/scenario", "source powers are set by snr_db and inr_db; the power fields are ignored");
  (void)sc;
}

RunResult mvdr_run(const ExperimentConfig& c) {
  const MvdrScene sc = mvdr_scene(c.document);
  const Node s = root(c)["scenario"];
  const int T = s["snapshots"].integer();
  const double snr = s["snr_db"].number();
  SynthesisOptions synth;
  synth.near_field_model = steering_model(s["model"]);
  const SteeringModel presumed = steering_model(root(c)["params"]["presumed_model"]);
  const ArrayGeometry& g = sc.geometry;
  const CVec a = steering(g, sc.sources[0].theta, sc.sources[0].range, presumed);
  const CMat A = steering_matrix(g, sc.sources, synth.near_field_model);

  auto trial = [&](int t) {
    const std::uint64_t seed = derive_seed(trial_seed(c, t), {stream_tag("snapshots")});
    const SnapshotSet snaps = synthesize_snapshots(g, sc.sources, T, snr, seed, synth);
    const MvdrResult m = mvdr_weights(sample_covariance(snaps).matrix, a);
    const double gs = std::norm(m.w.dot(A.col(0)));
    const double gi = std::norm(m.w.dot(A.col(1)));
    const double sinr = gs / (sc.sources[1].power * gi + sc.noise_var * m.w.squaredNorm());
    const Eigen::RowVectorXcd out = beamformer_output(m.w, snaps.data);
    const Eigen::RowVectorXcd ref = source_waveforms(sc.sources, T, seed).row(0);
    const double corr = std::abs(out.dot(ref)) / (out.norm() * ref.norm());
    return Row{integer(t), num(std::abs(m.w.dot(a) - 1.0)), num(lin2db(gs / gi)), num(lin2db(sinr)), num(corr),
               integer(m.diagonal_loading), num(m.condition_number)};
  };
  auto rows = parallel_map(root(c)["trials"].integer(), c.workers, trial);
  ResultTable t({"trial", "distortionless_error", "interferer_suppression_db", "output_sinr_db",
                 "waveform_correlation", "diagonal_loading", "condition_number"});
  for (auto& r : rows) t.add_row(std::move(r));
  return {std::move(t), {}};
}

// --------------------------------------------------------------- sidelobe

Json sidelobe_defaults() {
  Json j = skeleton("sidelobe", std::nullopt);
  j["geometry"] = geometry_block({32, 3e6, std::nullopt, 0.5, "center", 1540.0});
  j["params"] = {{"focus_depth_m", 0.04},     {"delta", 0.1},
                 {"ring_points", 50},        {"ring_angle_min_deg", 4.0},
                 {"ring_angle_max_deg", 40.0}, {"ring_radius_m", nullptr},
                 {"mu0", 10.0},              {"mu_growth", 10.0},
                 {"stages", 6},              {"max_iters_per_stage", 200000},
                 {"feasibility_tol", 1e-4}};
  return j;
}

struct SidelobeSetup {
  SidelobeProblem problem;
  SidelobeOptions options;
  std::vector<double> angles_deg;
  std::vector<Point3> points;
};

SidelobeSetup sidelobe_setup(const Json& doc) {
  const ArrayGeometry g = geometry_from(root(doc)["geometry"]);
  const Node p = root(doc)["params"];
  const double zf = p["focus_depth_m"].positive();
  const int P = p["ring_points"].at_least(0);
  if (P % 2 != 0) p["ring_points"].fail("must be even (points are split evenly between both sides)");
  const double amin = p["ring_angle_min_deg"].in_range(0.0, 90.0);
  const double amax = p["ring_angle_max_deg"].in_range(0.0, 90.0);
  if (!(amax >= amin)) p["ring_angle_max_deg"].fail("must be at least ring_angle_min_deg");
  const double radius = p["ring_radius_m"].optional_number().value_or(zf);
  if (!(radius > 0.0)) p["ring_radius_m"].fail("must be positive");

  SidelobeSetup out;
  const auto elements = line_array(g.num_elements(), g.spacing());
  out.problem.focus_response = point_response(elements, {0.0, 0.0, zf}, g.wavelength());
  out.problem.delta = p["delta"].positive();
  const int half = P / 2;
  for (int side : {-1, 1})
    for (int i = 0; i < half; ++i) {
      const double a = half == 1 ? amin : amin + (amax - amin) * i / (half - 1);
      out.angles_deg.push_back(side * a);
      out.points.push_back({radius * std::sin(deg2rad(side * a)), 0.0, radius * std::cos(deg2rad(side * a))});
    }
  out.problem.sidelobe_responses.resize(g.num_elements(), P);
  for (int q = 0; q < P; ++q)
    out.problem.sidelobe_responses.col(q) = point_response(elements, out.points[q], g.wavelength());
  out.options.mu0 = p["mu0"].positive();
  out.options.mu_growth = p["mu_growth"].positive();
  out.options.stages = p["stages"].at_least(1);
  out.options.max_iters_per_stage = p["max_iters_per_stage"].at_least(1);
  out.options.feasibility_tol = p["feasibility_tol"].positive();
  return out;
}

void sidelobe_check(const Json& doc, Warnings&) { sidelobe_setup(doc); }

RunResult sidelobe_run(const ExperimentConfig& c) {
  const SidelobeSetup su = sidelobe_setup(c.document);
  const SidelobeSolution sol = sidelobe_design(su.problem, su.options);
  const CVec& yf = su.problem.focus_response;
  const CVec mf = yf / yf.squaredNorm();
  const CMat& Y = su.problem.sidelobe_responses;
  const RVec mf_resp = Y.cols() ? RVec((Y.adjoint() * mf).cwiseAbs()) : RVec();
  const RVec sol_resp = Y.cols() ? RVec((Y.adjoint() * sol.w).cwiseAbs()) : RVec();
  ResultTable t({"xi", "max_sidelobe", "delta", "feasible", "iterations", "distortionless_error", "matched_xi",
                 "matched_max_sidelobe"});
  t.add_row({num(sol.xi), num(sol.max_sidelobe), num(su.problem.delta), integer(sol.feasible), integer(sol.iterations),
             num(std::abs(sol.w.dot(yf) - 1.0)), num(mf.norm()), num(Y.cols() ? mf_resp.maxCoeff() : 0.0)});
  ResultTable pts({"point", "angle_deg", "x_m", "z_m", "matched_response", "designed_response"});
  for (std::size_t q = 0; q < su.points.size(); ++q)
    pts.add_row({integer(static_cast<std::int64_t>(q)), num(su.angles_deg[q]), num(su.points[q][0]),
                 num(su.points[q][2]), num(mf_resp[static_cast<Eigen::Index>(q)]),
                 num(sol_resp[static_cast<Eigen::Index>(q)])});
  RunResult res{std::move(t), {}};
  res.auxiliary.emplace("points", std::move(pts));
  return res;
}

// -------------------------------------------------------------- wigner-pr

Json wigner_defaults() {
  Json j = skeleton("wigner-pr", 50);
  j["params"] = {{"bandlimit", 3},   {"oversampling", 8.0}, {"restarts", 20},
                 {"max_iters", 3000}, {"tol", 1e-8},        {"flip_hops", 6},
                 {"truncation_iters", 1000},
                 {"success_threshold", 1e-3}};
  return j;
}

void wigner_check(const Json& doc, Warnings& w) {
  const Node p = root(doc)["params"];
  const int B = p["bandlimit"].at_least(1);
  if (B > 12) p["bandlimit"].fail("bandlimits above 12 are not supported by the dense solver");
  if (p["oversampling"].positive() < 4.0)
    warn(w, "/params/oversampling", "fewer than 4 measurements per unknown rarely suffices for phase retrieval");
  p["restarts"].at_least(1);
  p["max_iters"].at_least(1);
  p["tol"].positive();
  p["flip_hops"].at_least(0);
  p["truncation_iters"].at_least(0);
  p["success_threshold"].positive();
}

RunResult wigner_run(const ExperimentConfig& c) {
  const Node p = root(c)["params"];
  const int B = p["bandlimit"].integer();
  const int n = wigner_coefficient_count(B);
  const int m = static_cast<int>(std::ceil(p["oversampling"].number() * n));
  const double thr = p["success_threshold"].number();
  PhaseRetrievalOptions base;
  base.restarts = p["restarts"].integer();
  base.max_iters = p["max_iters"].integer();
  base.tol = p["tol"].number();
  base.flip_hops = p["flip_hops"].integer();
  base.truncation_iters = p["truncation_iters"].integer();

  auto trial = [&](int t) {
    const std::uint64_t seed = trial_seed(c, t);
    const CMat A = build_wigner_matrix(B, random_rotation_samples(m, seed));
    RandomStream rng(seed, {stream_tag("coefficients")});
    CVec alpha(n);
    for (int i = 0; i < n; ++i) alpha[i] = rng.complex_normal(1.0);
    PhaseRetrievalOptions o = base;
    o.seed = derive_seed(seed, {stream_tag("phase-retrieval")});
    const PhaseRetrievalResult r = phase_retrieve(phaseless_measure(alpha, A), A, o);
    const double e1 = relative_error_up_to_phase(r.alpha, alpha);
    const double e2 = relative_error_up_to_ambiguity(r.alpha, alpha);
    return Row{integer(t),     integer(n),          integer(m),          num(r.residual),
               integer(r.converged), num(e1),        num(e2),             integer(e1 <= thr),
               integer(e2 <= thr),   integer(r.best_restart), integer(static_cast<std::int64_t>(r.log.size()))};
  };
  auto rows = parallel_map(root(c)["trials"].integer(), c.workers, trial);
  ResultTable t({"instance", "coefficients", "measurements", "residual", "converged", "rel_err_phase",
                 "rel_err_ambiguity", "success_phase", "success_ambiguity", "best_restart", "restarts_run"});
  for (auto& r : rows) t.add_row(std::move(r));
  return {std::move(t), {}};
}

}  // namespace

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> r = {
      {"regions", "field-region boundaries and classification of probe ranges", regions_defaults, regions_check,
       regions_run},
      {"wavefront-mse", "per-element MSE between spherical and planar steering versus range", wavefront_defaults,
       wavefront_check, wavefront_run},
      {"music2d", "2-D near-field MUSIC over random source placements", music2d_defaults, music2d_check, music2d_run},
      {"mixed-cumulant", "mixed far/near-field localization via fourth-order cumulants", mixed_defaults, mixed_check,
       mixed_run},
      {"coherent", "coherent far-field source with near-field reflections", coherent_defaults, coherent_check,
       coherent_run},
      {"chanest-nmse", "LS versus polar-dictionary OMP channel estimation NMSE", chanest_defaults, chanest_check,
       chanest_run},
      {"se-multiplex", "co-angle multiplexing: exact versus far-field-mismatched MMSE SE", multiplex_defaults,
       multiplex_check, multiplex_run},
      {"beamdepth", "closed-form versus numerical 3 dB beam depth", beamdepth_defaults, beamdepth_check,
       beamdepth_run},
      {"squint", "wideband near-field beam squint: predicted versus located peaks", squint_defaults, squint_check,
       squint_run},
      {"mvdr", "MVDR beamforming against a strong interferer", mvdr_defaults, mvdr_check, mvdr_run},
      {"sidelobe", "sidelobe-constrained minimum-norm focusing weights", sidelobe_defaults, sidelobe_check,
       sidelobe_run},
      {"wigner-pr", "phase retrieval of Wigner-D expansion coefficients", wigner_defaults, wigner_check, wigner_run},
  };
  return r;
}

}  // namespace nfkit::runner::detail
