#include "doctest.h"

#include <cmath>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "isoproj/errors.hpp"
#include "isoproj/experiment.hpp"
#include "isoproj/grassmannian.hpp"
#include "isoproj/selftest.hpp"

using namespace isoproj;
using nlohmann::json;

namespace {

ExperimentConfig small_projection(std::uint64_t seed) {
  ExperimentConfig c = default_config("project", seed, "dimension");
  c.points = 3000;
  c.subspace_trials = 5;
  return c;
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_CASE("config parsing rejects bad documents") {
  const json good = to_json(default_config("project", 5, "dimension"));
  CHECK_NOTHROW(parse_config(good));

  json bad = good;
  bad["m"] = 3;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = good;
  bad["colour"] = "blue";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = good;
  bad["thresholds"]["typo"] = 1;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = good;
  bad.erase("seed");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  CHECK_FALSE(parse_config_unseeded(bad).seed.has_value());

  bad = good;
  bad["points"] = "many";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = good;
  bad["points"] = 10;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = good;
  bad["experiment"] = "teleport";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = good;
  bad["set_a"]["ambient"] = 6;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = good;
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  ExperimentConfig unseeded = default_config("project", 5, "dimension");
  unseeded.seed.reset();
  CHECK_THROWS_AS(run_experiment(unseeded), ConfigError);
}

TEST_CASE("config round trip and shipped configs match the defaults") {
  for (const char* kind : {"project", "intersect", "slice", "disintegrate", "heisenberg"}) {
    const ExperimentConfig c = default_config(kind, 11);
    CHECK(to_json(parse_config(to_json(c))) == to_json(c));
  }
  const std::pair<const char*, std::pair<const char*, const char*>> shipped[] = {
      {"project_dimension", {"project", "dimension"}},
      {"project_proxy", {"project", "proxy"}},
      {"intersect_independent", {"intersect", "independent"}},
      {"intersect_same", {"intersect", "same"}},
      {"intersect_disjoint", {"intersect", "disjoint"}},
      {"slice", {"slice", ""}},
      {"disintegrate_n1m1", {"disintegrate", "n1m1"}},
      {"disintegrate_n2m1", {"disintegrate", "n2m1"}},
      {"disintegrate_n2m2", {"disintegrate", "n2m2"}},
      {"heisenberg", {"heisenberg", ""}},
  };
  for (const auto& [file, kv] : shipped) {
    CAPTURE(file);
    const json doc = read_json(std::filesystem::path(ISOPROJ_CONFIG_DIR) / (std::string(file) + ".json"));
    const ExperimentConfig c = parse_config(doc);
    CHECK(to_json(c) == to_json(default_config(kv.first, kDefaultSelftestSeed, kv.second)));
  }
}

TEST_CASE("reports are independent of the thread count and carry stream ids") {
  const ExperimentConfig c = small_projection(77);
  const ExperimentReport one = run_experiment(c, {1});
  const ExperimentReport three = run_experiment(c, {3});
  CHECK(strip_timing(to_json(one)).dump() == strip_timing(to_json(three)).dump());

  // Any trial can be redone from (seed, stream_id): the subspace is the
  // first draw of its stream.
  for (const TrialRecord& t : one.trials) {
    RngStream rng(*c.seed, t.stream_id);
    CHECK(sample_isotropic_subspace(c.n, c.m, rng).frame().rows() == t.subspace_frame);
  }

  const ExperimentReport other = run_experiment(small_projection(78), {1});
  CHECK(strip_timing(to_json(one)).dump() != strip_timing(to_json(other)).dump());
}

TEST_CASE("report JSON and CSV shapes") {
  const ExperimentReport r = run_experiment(small_projection(3), {1});
  const json j = to_json(r);
  for (const char* key : {"schema_version", "config", "trials", "summary", "verdicts", "runtime_seconds", "version"}) {
    CHECK(j.contains(key));
  }
  for (const char* key : {"median", "q1", "q3", "pass_fraction"}) CHECK(j["summary"].contains(key));
  CHECK(j["trials"].size() == 5);
  for (const char* key : {"trial_id", "stream_id", "subspace_frame", "estimates", "flags"}) {
    CHECK(j["trials"][0].contains(key));
  }
  CHECK(j["config"]["seed"] == 3);
  CHECK(j["version"] == kLibraryVersion);

  const std::string csv = to_csv(r);
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  CHECK(header.rfind("trial_id,stream_id,subspace_frame.0,", 0) == 0);
  CHECK(header.find("estimates.dimension") != std::string::npos);
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("strip_timing removes runtime fields at any depth") {
  const json doc = {{"runtime_seconds", 1.5},
                    {"a", {{"runtime_seconds", 2}, {"keep", 1}}},
                    {"list", json::array({{{"timing", {{"budget", 3}}}, {"x", 4}}})}};
  const json expect = {{"a", {{"keep", 1}}}, {"list", json::array({{{"x", 4}}})}};
  CHECK(strip_timing(doc) == expect);
}

TEST_CASE("sliced mass integral against a brute-force Riemann sum") {
  // One dimension: grid measure on [0, 1].
  const std::size_t n = 10000;
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  const EmpiricalMeasure line = EmpiricalMeasure::uniform(MetricTag::euclidean(1), pts);
  const double delta = 0.01, h = 0.007;
  double brute = 0;
  for (int k = -10; k <= 200; ++k) {
    double mass = 0;
    for (double p : pts) mass += std::abs(p - k * h) <= delta ? 1.0 / n : 0.0;
    brute += mass * h / (2 * delta);
  }
  CHECK(sliced_mass_integral(line, delta, h) == doctest::Approx(brute).epsilon(1e-12));
  CHECK(std::abs(brute - 1) < 0.02);

  // Two dimensions: grid on the unit square, normalized by the disc area.
  const std::size_t side = 200;
  std::vector<double> sq;
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j) {
      sq.push_back((static_cast<double>(i) + 0.5) / side);
      sq.push_back((static_cast<double>(j) + 0.5) / side);
    }
  const EmpiricalMeasure square = EmpiricalMeasure::uniform(MetricTag::euclidean(2), sq);
  CHECK(std::abs(sliced_mass_integral(square, 0.02, 0.014) - 1) < 0.03);
  CHECK_THROWS_AS(sliced_mass_integral(square, 0.0, 0.01), ArgumentError);
}

TEST_CASE("a slab wider than the cloud is the whole set") {
  ExperimentConfig c = default_config("slice", 21);
  c.points = 20000;
  c.subspace_trials = 2;
  c.deltas = {100.0};
  const ExperimentReport r = run_experiment(c, {1});
  for (const TrialRecord& t : r.trials) {
    CHECK(t.estimates.at("delta_0.points") == 20000.0);
    // Slabs hold the 1.5-dimensional set itself.
    CHECK(std::abs(t.estimates.at("slice_dimension") - 1.5) < 0.15);
  }
}

TEST_CASE("disjoint control: separated projections never overlap") {
  ExperimentConfig c = default_config("intersect", 4, "disjoint");
  c.points = 5000;
  c.subspace_trials = 6;
  const ExperimentReport r = run_experiment(c, {1});
  for (const TrialRecord& t : r.trials) {
    if (t.estimates.at("separated") == 1.0) CHECK(t.estimates.at("overlap_points") == 0.0);
  }
  CHECK(r.verdicts.at("intersection.disjoint_control") == "pass");
}

TEST_CASE("polar oracle for the disintegration constant on the plane") {
  // |S^1| / |S^0| = pi for every integrable f.
  for (TestFunction f : {TestFunction::IsotropicGaussian, TestFunction::AnisotropicGaussian, TestFunction::Bump}) {
    CHECK(polar_quadrature_ratio(f) == doctest::Approx(std::numbers::pi).epsilon(1e-6));
  }
}

TEST_CASE("reproducibility criterion compares documents without timing") {
  const json a = {{"x", 1}, {"timing", {{"runtime_seconds", 1.0}}}};
  const json b = {{"x", 1}, {"timing", {{"runtime_seconds", 9.0}}}};
  const json c = {{"x", 2}, {"timing", {{"runtime_seconds", 1.0}}}};
  CHECK(reproducibility_criterion(a, b, 1, 2, 0.1).checks_pass);
  CHECK_FALSE(reproducibility_criterion(a, c, 1, 2, 0.1).checks_pass);
  CriterionResult slow{4, "x", true, 61.0, 60.0, json::object()};
  CHECK_FALSE(slow.pass());
  CHECK(format_line(slow).rfind("[FAIL]", 0) == 0);
}
