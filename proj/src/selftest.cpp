#include "isoproj/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "isoproj/dimension.hpp"
#include "isoproj/experiment.hpp"
#include "isoproj/fractal.hpp"
#include "isoproj/grassmannian.hpp"
#include "isoproj/heisenberg.hpp"

namespace isoproj {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSelftest = 0x73656c66;

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RngStream criterion_stream(std::uint64_t seed, int id, std::uint64_t index = 0) {
  return RngStream(seed, derive_stream(kSelftest + static_cast<std::uint64_t>(id), index));
}

Point gaussian_point(std::size_t dim, RngStream& rng, double scale) {
  Point p(dim);
  for (double& v : p) v = scale * rng.normal();
  return p;
}

HeisenbergPoint gaussian_heisenberg(int n, RngStream& rng) {
  return {gaussian_point(2 * static_cast<std::size_t>(n), rng, 2.0), 2.0 * rng.normal()};
}

double point_gap(const HeisenbergPoint& a, const HeisenbergPoint& b) {
  double g = std::abs(a.t - b.t);
  for (std::size_t i = 0; i < a.z.size(); ++i) g = std::max(g, std::abs(a.z[i] - b.z[i]));
  return g;
}

double vector_gap(std::span<const double> a, std::span<const double> b) {
  double g = 0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

CriterionResult identity_suite(std::uint64_t seed) {
  CriterionResult r{1, "algebraic identities", false, 0, 10, json::object()};
  constexpr std::size_t kInputs = 100000;
  RngStream rng = criterion_stream(seed, 1);
  // A pool of subspaces for each (n, m); drawing one per input would only
  // time the sampler.
  std::vector<std::vector<HorizontalSubgroup>> pool(3);
  for (int n = 1; n <= 3; ++n) {
    for (int k = 0; k < 64; ++k) {
      const int m = 1 + k % n;
      pool[static_cast<std::size_t>(n - 1)].emplace_back(sample_isotropic_subspace(n, m, rng));
    }
  }
  std::map<std::string, double> worst;
  auto note = [&](const char* name, double v) { worst[name] = std::max(worst[name], v); };
  for (std::size_t i = 0; i < kInputs; ++i) {
    const int n = 1 + static_cast<int>(i % 3);
    const std::size_t zd = 2 * static_cast<std::size_t>(n);
    const HeisenbergPoint p = gaussian_heisenberg(n, rng), q = gaussian_heisenberg(n, rng),
                          s = gaussian_heisenberg(n, rng);
    const HeisenbergPoint e = HeisenbergPoint::identity(n);
    const double rr = 0.1 + 3.0 * rng.uniform();
    note("associativity", point_gap(mul(mul(p, q), s), mul(p, mul(q, s))));
    note("identity", std::max(point_gap(mul(p, e), p), point_gap(mul(e, p), p)));
    note("inverse", std::max(point_gap(mul(p, inverse(p)), e), point_gap(mul(inverse(p), p), e)));
    note("dilation_automorphism", point_gap(dilate(rr, mul(p, q)), mul(dilate(rr, p), dilate(rr, q))));
    note("gauge_homogeneity", std::abs(koranyi_norm(dilate(rr, p)) - rr * koranyi_norm(p)));
    note("gauge_left_invariance",
         std::abs(koranyi_distance(mul(s, p), mul(s, q)) - koranyi_distance(p, q)));

    const auto& subs = pool[static_cast<std::size_t>(n - 1)];
    const HorizontalSubgroup& v = subs[i % subs.size()];
    const HeisenbergPoint h = horizontal_projection(v, p), w = vertical_projection(v, p);
    note("splitting", point_gap(mul(w, h), p));
    note("projector_idempotence",
         std::max(point_gap(horizontal_projection(v, h), h), point_gap(vertical_projection(v, w), w)));
    const Point px = v.base().project(p.z), py = v.base().project(q.z);
    note("projector_idempotence", vector_gap(v.base().project(px), px));
    note("projector_self_adjoint", std::abs(dot(px, q.z) - dot(p.z, py)));

    const Point x = gaussian_point(zd, rng, 2.0), y = gaussian_point(zd, rng, 2.0),
                z = gaussian_point(zd, rng, 2.0);
    const double a = rng.normal(), b = rng.normal();
    note("omega_antisymmetry", std::abs(symplectic_form(x, y) + symplectic_form(y, x)));
    Point comb(zd);
    for (std::size_t k = 0; k < zd; ++k) comb[k] = a * x[k] + b * y[k];
    note("omega_bilinearity",
         std::abs(symplectic_form(comb, z) - (a * symplectic_form(x, z) + b * symplectic_form(y, z))));
  }
  bool ok = true;
  for (const auto& [name, v] : worst) ok = ok && v <= 1e-9;
  r.checks_pass = ok;
  r.detail["inputs_per_identity"] = kInputs;
  r.detail["max_residual"] = worst;
  r.detail["tolerance"] = 1e-9;
  return r;
}

CriterionResult sampler_validity(std::uint64_t seed) {
  CriterionResult r{2, "isotropic sampler validity", false, 0, 30, json::object()};
  RngStream rng = criterion_stream(seed, 2);
  double worst_orth = 0, worst_iso = 0;
  for (int i = 0; i < 10000; ++i) {
    const int n = 1 + i % 4;
    const int m = 1 + (i / 4) % n;
    const IsotropicSubspace v = sample_isotropic_subspace(n, m, rng);
    const Frame& f = v.frame();
    for (std::size_t a = 0; a < f.rank(); ++a) {
      for (std::size_t b = 0; b < f.rank(); ++b) {
        worst_orth = std::max(worst_orth, std::abs(dot(f.vector(a), f.vector(b)) - (a == b ? 1.0 : 0.0)));
        worst_iso = std::max(worst_iso, std::abs(symplectic_form(f.vector(a), f.vector(b))));
      }
    }
  }
  RngStream r1 = criterion_stream(seed, 2, 1), r2 = criterion_stream(seed, 2, 2),
            r3 = criterion_stream(seed, 2, 3);
  const InvarianceReport norm_stat = invariance_test(2, 1, InvarianceStatistic::ProjectionNorm, 10000, r1);
  const InvarianceReport align_stat =
      invariance_test(2, 1, InvarianceStatistic::FirstVectorAlignment, 10000, r2);
  const InvarianceReport biased = invariance_test(2, 1, InvarianceStatistic::ProjectionNorm, 10000, r3,
                                                  SubspaceSampler::BiasedFirstCoordinate);
  r.checks_pass = worst_orth <= 1e-10 && worst_iso <= 1e-10 && norm_stat.pass && align_stat.pass &&
                  !biased.pass;
  r.detail = {{"subspaces", 10000},
              {"max_orthonormality_error", worst_orth},
              {"max_isotropy_error", worst_iso},
              {"ks_projection_norm", {{"statistic", norm_stat.ks.statistic}, {"p_value", norm_stat.ks.p_value}}},
              {"ks_first_vector", {{"statistic", align_stat.ks.statistic}, {"p_value", align_stat.ks.p_value}}},
              {"ks_biased_control", {{"statistic", biased.ks.statistic}, {"p_value", biased.ks.p_value}}}};
  return r;
}

CriterionResult disintegration(std::uint64_t seed, unsigned threads, json& reports) {
  CriterionResult r{3, "disintegration identity", true, 0, 120, json::object()};
  for (const char* variant : {"n1m1", "n2m1", "n2m2"}) {
    const ExperimentReport rep = run_disintegration_experiment(default_config("disintegrate", seed, variant), {threads});
    reports[std::string("disintegrate_") + variant] = to_json(rep);
    r.checks_pass = r.checks_pass && rep.passed();
    json ratios = json::array();
    for (const TrialRecord& t : rep.trials) {
      if (const auto it = t.estimates.find("ratio"); it != t.estimates.end()) ratios.push_back(it->second);
    }
    r.detail[variant] = {{"ratios", ratios}, {"worst_pair_z", rep.details.at("worst_pair_z")},
                         {"verdicts", rep.verdicts}};
    if (rep.details.contains("worst_oracle_relative_error")) {
      r.detail[variant]["worst_oracle_relative_error"] = rep.details.at("worst_oracle_relative_error");
    }
  }
  return r;
}

CriterionResult measure_bound(std::uint64_t seed, unsigned threads) {
  CriterionResult r{4, "projection measure bound slope", false, 0, 60, json::object()};
  const Point x{0.6, 0.0, 0.0, 0.8};
  std::vector<double> d1, d2;
  for (int k = 0; k <= 8; ++k) d1.push_back(std::pow(10.0, -3.0 + 2.0 * k / 8));
  for (int k = 0; k <= 8; ++k) d2.push_back(std::pow(10.0, -1.5 + 1.0 * k / 8));
  RngStream a = criterion_stream(seed, 4, 1), b = criterion_stream(seed, 4, 2);
  const SmallnessSweep s1 = smallness_sweep(x, 1, d1, 200000, a, threads);
  const SmallnessSweep s2 = smallness_sweep(x, 2, d2, 200000, b, threads);
  r.checks_pass = std::abs(s1.loglog.slope - 1.0) <= 0.15 && std::abs(s2.loglog.slope - 2.0) <= 0.15;
  r.detail = {{"trials", 200000},
              {"slope_n2_m1", s1.loglog.slope},
              {"slope_n2_m2", s2.loglog.slope},
              {"tolerance", 0.15}};
  return r;
}

CriterionResult energy_oracle(std::uint64_t seed, unsigned threads) {
  CriterionResult r{5, "Riesz energy oracle", false, 0, 30, json::object()};
  constexpr std::size_t kPoints = 100000;
  RngStream rng = criterion_stream(seed, 5);
  std::vector<double> pts(kPoints);
  for (double& v : pts) v = rng.uniform();
  const EmpiricalMeasure mu = EmpiricalMeasure::uniform(MetricTag::euclidean(1), std::move(pts));
  PairOptions opt;
  opt.threads = threads;
  opt.max_points = kPoints;
  const RieszEnergy e = riesz_energy(mu, 0.5, mu.metric(), opt);
  // int_0^1 int_0^1 |x - y|^{-1/2} dx dy = 2 int_0^1 (1 - u) u^{-1/2} du = 8/3.
  const double exact = 8.0 / 3.0;
  const double rel = std::abs(e.value / exact - 1);

  // Two atoms of mass 1/2 at distance 1 and s = 1.
  const MetricTag e1 = MetricTag::euclidean(1);
  const RieszEnergy two = riesz_energy(EmpiricalMeasure(e1, {0.0, 1.0}, {0.5, 0.5}, 1.0), 1.0, e1);
  const MutualEnergy cross = mutual_energy(EmpiricalMeasure(e1, {0.0}, {1.0}, 1.0),
                                           EmpiricalMeasure(e1, {2.0}, {1.0}, 1.0), 1.0, e1);
  const double hand = std::max({std::abs(two.pair_sum - 0.5), std::abs(two.value - 1.0),
                                std::abs(cross.value - 0.5)});
  r.checks_pass = rel <= 0.02 && hand <= 1e-12 && e.points_used == kPoints;
  r.detail = {{"points", e.points_used},
              {"energy", e.value},
              {"exact", exact},
              {"relative_error", rel},
              {"two_atom_pair_sum", two.pair_sum},
              {"two_atom_renormalized", two.value},
              {"mutual_atoms", cross.value},
              {"hand_value_max_error", hand}};
  return r;
}

CriterionResult estimator_calibration(std::uint64_t seed, unsigned threads) {
  CriterionResult r{6, "estimator calibration", true, 0, 180, json::object()};
  constexpr std::size_t kPoints = 100000;
  CorrelationOptions opt;
  opt.pairs.threads = threads;
  opt.pairs.max_points = kPoints;
  std::uint64_t index = 0;
  auto check = [&](const std::string& name, const EmpiricalMeasure& cloud, double exact, double slack) {
    const DimensionEstimate d = correlation_dimension(cloud, cloud.metric(), default_radius_grid(cloud), opt);
    const double allowed = slack + 2 * d.standard_error;
    const bool ok = std::abs(d.value - exact) <= allowed;
    r.checks_pass = r.checks_pass && ok;
    r.detail["sets"][name] = {{"metric", cloud.metric().name()}, {"estimate", d.value},
                              {"standard_error", d.standard_error}, {"similarity_dimension", exact},
                              {"allowed", allowed}, {"points", cloud.size()},
                              {"points_in_estimator", d.points_used}, {"pass", ok}};
  };
  for (const auto& name : catalogue_names()) {
    const SimilarityIFS ifs = catalogue_ifs(name);
    RngStream rng = criterion_stream(seed, 6, index++);
    check(name, chaos_game(ifs, kPoints, rng), similarity_dimension(ifs), 0.05);
  }
  for (const auto& name : heisenberg_catalogue_names()) {
    const HeisenbergIFS ifs = heisenberg_catalogue(name);
    RngStream rng = criterion_stream(seed, 6, index++);
    check(name, heisenberg_chaos_game(ifs, kPoints, rng), similarity_dimension(ifs), 0.1);
  }
  // Lattice-tile box counts of the unit gauge ball, centers restricted to
  // B(0, 0.6) so no counted tile reaches the boundary.
  RngStream rng = criterion_stream(seed, 6, index++);
  const EmpiricalMeasure ball = gauge_ball_sample(1, 200000, rng);
  BoxOptions box;
  box.window = Ball{{0.0, 0.0, 0.0}, 0.6};
  const DimensionEstimate b = box_dimension(ball, geometric_grid(0.06, 0.3, 8), box);
  const bool ball_ok = std::abs(b.value - 4.0) <= 0.2;
  r.checks_pass = r.checks_pass && ball_ok;
  r.detail["gauge_ball_box_dimension"] = {{"estimate", b.value}, {"standard_error", b.standard_error},
                                          {"expected", 4.0}, {"tolerance", 0.2},
                                          {"points", ball.size()}, {"pass", ball_ok}};
  return r;
}

CriterionResult experiment_criterion(int id, const std::string& name, double budget,
                                     const std::vector<std::pair<std::string, ExperimentConfig>>& runs,
                                     unsigned threads, json& reports) {
  CriterionResult r{id, name, true, 0, budget, json::object()};
  for (const auto& [key, config] : runs) {
    const ExperimentReport rep = run_experiment(config, {threads});
    reports[key] = to_json(rep);
    r.checks_pass = r.checks_pass && rep.passed();
    r.detail[key] = {{"verdicts", rep.verdicts},
                     {"summary", reports[key]["summary"]},
                     {"details", rep.details}};
  }
  return r;
}

template <class Fn>
CriterionResult timed(Fn&& fn) {
  const Stopwatch watch;
  CriterionResult r = fn();
  r.runtime_seconds = watch.seconds();
  return r;
}

json criterion_json(const CriterionResult& r) {
  return {{"id", r.id},
          {"name", r.name},
          {"verdict", r.checks_pass ? "pass" : "fail"},
          {"detail", r.detail},
          {"timing",
           {{"runtime_seconds", r.runtime_seconds},
            {"budget_seconds", r.budget_seconds},
            {"within_budget", r.within_budget()}}}};
}

}  // namespace

bool SelftestResult::passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass(); });
}

json SelftestResult::to_json() const {
  json crit = json::array();
  for (const auto& c : criteria) crit.push_back(criterion_json(c));
  return {{"schema_version", kReportSchemaVersion},
          {"seed", seed},
          {"version", kLibraryVersion},
          {"criteria", crit},
          {"reports", reports}};
}

SelftestResult run_selftest(std::uint64_t seed, unsigned threads, const CriterionCallback& on_result) {
  SelftestResult out;
  out.seed = seed;
  auto add = [&](CriterionResult r) {
    out.criteria.push_back(std::move(r));
    if (on_result) on_result(out.criteria.back());
  };
  json& reports = out.reports;
  add(timed([&] { return identity_suite(seed); }));
  add(timed([&] { return sampler_validity(seed); }));
  add(timed([&] { return disintegration(seed, threads, reports); }));
  add(timed([&] { return measure_bound(seed, threads); }));
  add(timed([&] { return energy_oracle(seed, threads); }));
  add(timed([&] { return estimator_calibration(seed, threads); }));
  add(timed([&] {
    return experiment_criterion(7, "projection probe", 300,
                                {{"project_dimension", default_config("project", seed, "dimension")},
                                 {"project_proxy", default_config("project", seed, "proxy")}},
                                threads, reports);
  }));
  add(timed([&] {
    return experiment_criterion(8, "intersection probe", 300,
                                {{"intersect_independent", default_config("intersect", seed, "independent")},
                                 {"intersect_same", default_config("intersect", seed, "same")},
                                 {"intersect_disjoint", default_config("intersect", seed, "disjoint")}},
                                threads, reports);
  }));
  add(timed([&] {
    return experiment_criterion(9, "slicing probe", 300, {{"slice", default_config("slice", seed)}},
                                threads, reports);
  }));
  add(timed([&] {
    return experiment_criterion(10, "Heisenberg probes", 300,
                                {{"heisenberg", default_config("heisenberg", seed)}}, threads, reports);
  }));
  return out;
}

CriterionResult reproducibility_criterion(const json& first, const json& second, unsigned first_threads,
                                          unsigned second_threads, double seconds) {
  CriterionResult r{11, "reproducibility", false, seconds, 1e9, json::object()};
  const std::string a = strip_timing(first).dump();
  const std::string b = strip_timing(second).dump();
  r.checks_pass = a == b;
  std::size_t diff = 0;
  while (diff < a.size() && diff < b.size() && a[diff] == b[diff]) ++diff;
  r.detail = {{"threads", {first_threads, second_threads}},
              {"bytes", a.size()},
              {"identical", a == b}};
  if (a != b) r.detail["first_difference_at"] = diff;
  return r;
}

SelftestResult run_acceptance(std::uint64_t seed, unsigned first_threads, unsigned second_threads,
                              const CriterionCallback& on_result) {
  const Stopwatch watch;
  SelftestResult first = run_selftest(seed, first_threads, on_result);
  const SelftestResult second = run_selftest(seed, second_threads);
  CriterionResult repro =
      reproducibility_criterion(first.to_json(), second.to_json(), first_threads, second_threads, watch.seconds());
  // The budget covers both passes: twice the sum of the per-criterion budgets.
  repro.budget_seconds = 0;
  for (const auto& c : first.criteria) repro.budget_seconds += 2 * c.budget_seconds;
  first.criteria.push_back(repro);
  if (on_result) on_result(first.criteria.back());
  return first;
}

std::string format_line(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "[%s] %2d %-32s (%.1f s / %.0f s)", r.pass() ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.runtime_seconds, r.budget_seconds);
  std::string line = head;
  if (!r.checks_pass) line += " checks failed";
  if (!r.within_budget()) line += " over budget";
  return line;
}

}  // namespace isoproj
