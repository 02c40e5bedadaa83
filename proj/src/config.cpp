#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "isoproj/errors.hpp"
#include "isoproj/experiment.hpp"
#include "isoproj/heisenberg.hpp"

namespace isoproj {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Reader {
public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return false;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
    return true;
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

SetSelection parse_set(const json& doc, const std::string& where) {
  Reader r(doc, where);
  SetSelection s;
  if (!r.get("name", s.name)) throw ConfigError(where + ": missing name");
  r.get("ambient", s.ambient);
  r.get("rotation_seed", s.rotation_seed);
  r.get("offset", s.offset);
  r.finish();
  return s;
}

json set_json(const SetSelection& s) {
  return {{"name", s.name}, {"ambient", s.ambient}, {"rotation_seed", s.rotation_seed},
          {"offset", s.offset}};
}

json thresholds_json(const Thresholds& t) {
  return {
      {"projection_dimension_tolerance", t.projection_dimension_tolerance},
      {"projection_proxy_fraction", t.projection_proxy_fraction},
      {"proxy_dimension_tolerance", t.proxy_dimension_tolerance},
      {"proxy_cell_exponent_fraction", t.proxy_cell_exponent_fraction},
      {"proxy_min_cell_points", t.proxy_min_cell_points},
      {"overlap_epsilon", t.overlap_epsilon},
      {"intersection_positive_fraction", t.intersection_positive_fraction},
      {"slice_dimension_tolerance", t.slice_dimension_tolerance},
      {"slab_floor_factor", t.slab_floor_factor},
      {"min_slab_points", t.min_slab_points},
      {"mass_tolerance", t.mass_tolerance},
      {"mass_grid_step", t.mass_grid_step},
      {"disintegration_sigmas", t.disintegration_sigmas},
      {"polar_oracle_tolerance", t.polar_oracle_tolerance},
      {"heisenberg_slice_tolerance", t.heisenberg_slice_tolerance},
      {"dimension_drop_slack", t.dimension_drop_slack},
      {"identity_tolerance", t.identity_tolerance},
  };
}

Thresholds parse_thresholds(const json& doc) {
  Reader r(doc, "thresholds");
  Thresholds t;
  r.get("projection_dimension_tolerance", t.projection_dimension_tolerance);
  r.get("projection_proxy_fraction", t.projection_proxy_fraction);
  r.get("proxy_dimension_tolerance", t.proxy_dimension_tolerance);
  r.get("proxy_cell_exponent_fraction", t.proxy_cell_exponent_fraction);
  r.get("proxy_min_cell_points", t.proxy_min_cell_points);
  r.get("overlap_epsilon", t.overlap_epsilon);
  r.get("intersection_positive_fraction", t.intersection_positive_fraction);
  r.get("slice_dimension_tolerance", t.slice_dimension_tolerance);
  r.get("slab_floor_factor", t.slab_floor_factor);
  r.get("min_slab_points", t.min_slab_points);
  r.get("mass_tolerance", t.mass_tolerance);
  r.get("mass_grid_step", t.mass_grid_step);
  r.get("disintegration_sigmas", t.disintegration_sigmas);
  r.get("polar_oracle_tolerance", t.polar_oracle_tolerance);
  r.get("heisenberg_slice_tolerance", t.heisenberg_slice_tolerance);
  r.get("dimension_drop_slack", t.dimension_drop_slack);
  r.get("identity_tolerance", t.identity_tolerance);
  r.finish();
  return t;
}

EstimatorSettings parse_estimator(const json& doc) {
  Reader r(doc, "estimator");
  EstimatorSettings e;
  r.get("max_points", e.max_points);
  r.get("grid_count", e.grid_count);
  r.get("grid_decades", e.grid_decades);
  r.get("min_pairs", e.min_pairs);
  r.get("max_fraction", e.max_fraction);
  r.finish();
  return e;
}

bool is_euclidean_set(const std::string& name) {
  const auto names = catalogue_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_heisenberg_set(const std::string& name) {
  const auto names = heisenberg_catalogue_names();
  return name == "gauge_ball" || std::find(names.begin(), names.end(), name) != names.end();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

ExperimentConfig parse_impl(const json& doc, bool need_seed) {
  Reader r(doc, "config");
  ExperimentConfig c;
  r.get("schema_version", c.schema_version);
  require(c.schema_version == kConfigSchemaVersion,
          "config: unsupported schema_version " + std::to_string(c.schema_version));
  if (!r.get("experiment", c.experiment)) throw ConfigError("config: missing experiment");
  r.get("n", c.n);
  r.get("m", c.m);
  std::uint64_t seed = 0;
  if (r.get("seed", seed)) c.seed = seed;
  if (const json* a = r.child("set_a")) c.set_a = parse_set(*a, "set_a");
  if (const json* b = r.child("set_b")) c.set_b = parse_set(*b, "set_b");
  r.get("control", c.control);
  r.get("points", c.points);
  r.get("subspace_trials", c.subspace_trials);
  r.get("slice_anchors", c.slice_anchors);
  r.get("deltas", c.deltas);
  r.get("samples", c.samples);
  r.get("test_functions", c.test_functions);
  r.get("anchor_radius", c.anchor_radius);
  r.get("window_radius", c.window_radius);
  r.get("slice_r_max", c.slice_r_max);
  if (const json* e = r.child("estimator")) c.estimator = parse_estimator(*e);
  if (const json* t = r.child("thresholds")) c.thresholds = parse_thresholds(*t);
  r.get("output", c.output);
  r.finish();
  if (need_seed) require(c.seed.has_value(), "config: seed is required");
  validate(c);
  return c;
}

}  // namespace

void validate(const ExperimentConfig& c) {
  static const std::set<std::string> kinds = {"project", "intersect", "slice", "disintegrate",
                                              "heisenberg"};
  require(kinds.count(c.experiment) == 1, "config: unknown experiment '" + c.experiment + "'");
  require(c.n >= 1, "config: n must be >= 1");
  require(c.m >= 1 && c.m <= c.n, "config: need 1 <= m <= n (got n=" + std::to_string(c.n) +
                                      ", m=" + std::to_string(c.m) + ")");
  require(c.estimator.max_points >= 2, "estimator.max_points must be >= 2");
  require(c.estimator.grid_count >= 3, "estimator.grid_count must be >= 3");
  require(c.estimator.grid_decades > 0, "estimator.grid_decades must be positive");
  require(c.estimator.max_fraction > 0 && c.estimator.max_fraction <= 1,
          "estimator.max_fraction must lie in (0, 1]");
  for (double d : c.deltas) require(d > 0 && std::isfinite(d), "config: deltas must be positive");
  const Thresholds& t = c.thresholds;
  require(t.proxy_cell_exponent_fraction > 0 && t.proxy_cell_exponent_fraction <= 1,
          "thresholds.proxy_cell_exponent_fraction must lie in (0, 1]");
  for (double f : {t.projection_proxy_fraction, t.intersection_positive_fraction}) {
    require(f >= 0 && f <= 1, "thresholds: pass fractions must lie in [0, 1]");
  }
  require(t.overlap_epsilon > 0, "thresholds.overlap_epsilon must be positive");
  require(t.mass_grid_step > 0, "thresholds.mass_grid_step must be positive");

  if (c.experiment == "disintegrate") {
    require(c.samples >= 1000, "config: disintegrate needs samples >= 1000");
    require(!c.test_functions.empty(), "config: disintegrate needs test_functions");
    for (const auto& f : c.test_functions) {
      try {
        const TestFunction tf = test_function_from_string(f);
        require(tf != TestFunction::Constant, "config: test function 'constant' is not integrable");
      } catch (const ArgumentError& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }
    return;
  }

  require(c.subspace_trials >= 1, "config: subspace_trials must be >= 1");
  require(c.points >= 1000, "config: points must be >= 1000");
  const std::size_t ambient = 2 * static_cast<std::size_t>(c.n);
  if (c.experiment == "heisenberg") {
    require(is_heisenberg_set(c.set_a.name), "config: set_a must be a Heisenberg set");
    require(c.set_b.has_value() && is_heisenberg_set(c.set_b->name),
            "config: heisenberg needs a Heisenberg set_b");
    require(c.n == 1 || (c.set_a.name == "gauge_ball" && c.set_b->name == "gauge_ball"),
            "config: catalogue Heisenberg sets live in H^1");
    for (const SetSelection* s : {&c.set_a, &*c.set_b}) {
      require(s->offset.empty() || s->offset.size() == ambient + 1,
              "config: Heisenberg offsets need 2n+1 values");
    }
    require(!c.deltas.empty(), "config: heisenberg needs deltas");
    require(c.slice_anchors >= 1, "config: slice_anchors must be >= 1");
    require(c.anchor_radius > 0 && c.window_radius > 0 && c.slice_r_max > 0 &&
                c.anchor_radius + c.window_radius + c.slice_r_max <= 1.0 + 1e-12,
            "config: anchor_radius + window_radius + slice_r_max must fit in the unit ball");
    return;
  }

  auto check_set = [&](const SetSelection& s, const std::string& which) {
    require(is_euclidean_set(s.name), "config: " + which + " '" + s.name + "' is not a catalogue set");
    const std::size_t native = catalogue_ifs(s.name).dim();
    require(s.ambient == ambient || (s.ambient == 0 && native == ambient),
            "config: " + which + " must live in R^{2n} = R^" + std::to_string(ambient));
    require(s.offset.empty() || s.offset.size() == ambient,
            "config: " + which + " offset needs 2n values");
  };
  check_set(c.set_a, "set_a");
  if (c.experiment == "intersect") {
    static const std::set<std::string> controls = {"independent", "same", "disjoint"};
    require(controls.count(c.control) == 1, "config: unknown control '" + c.control + "'");
    if (c.control != "same") {
      require(c.set_b.has_value(), "config: intersect needs set_b");
      check_set(*c.set_b, "set_b");
    }
    if (c.control == "disjoint") {
      require(c.set_b && !c.set_b->offset.empty(), "config: disjoint control needs a set_b offset");
    }
  }
  if (c.experiment == "slice") {
    require(!c.deltas.empty(), "config: slice needs deltas");
    require(c.slice_anchors >= 1, "config: slice_anchors must be >= 1");
    require(c.thresholds.min_slab_points >= 2, "thresholds.min_slab_points must be >= 2");
  }
}

ExperimentConfig parse_config(const json& doc) { return parse_impl(doc, true); }
ExperimentConfig parse_config_unseeded(const json& doc) { return parse_impl(doc, false); }

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config_unseeded(doc);
}

json to_json(const ExperimentConfig& c) {
  json j = {
      {"schema_version", c.schema_version},
      {"experiment", c.experiment},
      {"n", c.n},
      {"m", c.m},
      {"set_a", set_json(c.set_a)},
      {"control", c.control},
      {"points", c.points},
      {"subspace_trials", c.subspace_trials},
      {"slice_anchors", c.slice_anchors},
      {"deltas", c.deltas},
      {"samples", c.samples},
      {"test_functions", c.test_functions},
      {"anchor_radius", c.anchor_radius},
      {"window_radius", c.window_radius},
      {"slice_r_max", c.slice_r_max},
      {"estimator",
       {{"max_points", c.estimator.max_points},
        {"grid_count", c.estimator.grid_count},
        {"grid_decades", c.estimator.grid_decades},
        {"min_pairs", c.estimator.min_pairs},
        {"max_fraction", c.estimator.max_fraction}}},
      {"thresholds", thresholds_json(c.thresholds)},
      {"output", c.output},
  };
  if (c.seed) j["seed"] = *c.seed;
  if (c.set_b) j["set_b"] = set_json(*c.set_b);
  return j;
}

ExperimentConfig default_config(const std::string& experiment, std::uint64_t seed,
                                const std::string& variant) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.seed = seed;
  c.n = 2;
  c.m = 1;
  if (experiment == "project") {
    c.set_a = {variant == "proxy" ? "dust8_4" : "dust3_5", 4, kEmbedRotationSeed, {}};
    c.points = 100000;
    c.subspace_trials = 30;
  } else if (experiment == "intersect") {
    c.control = variant.empty() ? "independent" : variant;
    c.set_a = {"dust8_4", 4, kEmbedRotationSeed, {}};
    c.set_b = SetSelection{"dust8_4", 4, kEmbedRotationSeed + 1, {}};
    if (c.control == "disjoint") c.set_b->offset = {100.0, 0.0, 0.0, 0.0};
    c.points = 100000;
    c.subspace_trials = 30;
  } else if (experiment == "slice") {
    c.set_a = {"dust8_4", 4, kEmbedRotationSeed, {}};
    c.points = 1000000;
    c.subspace_trials = 24;
    c.slice_anchors = 1;
    c.deltas = {0.004, 0.008, 0.016};
  } else if (experiment == "disintegrate") {
    if (variant == "n1m1") {
      c.n = 1;
    } else if (variant == "n2m2") {
      c.m = 2;
    }
    c.samples = 1000000;
    c.test_functions = {"isotropic_gaussian", "anisotropic_gaussian", "bump"};
  } else if (experiment == "heisenberg") {
    c.n = 1;
    c.set_a = {"gauge_ball", 0, kEmbedRotationSeed, {}};
    c.set_b = SetSelection{"gauge_ball", 0, kEmbedRotationSeed, {0.5, 0.0, 0.0}};
    c.points = 1000000;
    c.subspace_trials = 16;
    c.slice_anchors = 1;
    c.deltas = {0.01, 0.02, 0.04};
  } else {
    throw ConfigError("no default config for experiment '" + experiment + "'");
  }
  validate(c);
  return c;
}

bool ExperimentReport::passed() const {
  return std::none_of(verdicts.begin(), verdicts.end(),
                      [](const auto& kv) { return kv.second == "fail"; });
}

json to_json(const ExperimentReport& r) {
  json trials = json::array();
  for (const TrialRecord& t : r.trials) {
    json est = json::object();
    for (const auto& [k, v] : t.estimates) est[k] = std::isfinite(v) ? json(v) : json(nullptr);
    trials.push_back({{"trial_id", t.trial_id},
                      {"stream_id", t.stream_id},
                      {"subspace_frame", t.subspace_frame},
                      {"estimates", est},
                      {"flags", t.flags}});
  }
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"schema_version", kReportSchemaVersion},
          {"config", r.config},
          {"trials", trials},
          {"summary",
           {{"statistic", r.summary.statistic},
            {"count", r.summary.count},
            {"median", num(r.summary.median)},
            {"q1", num(r.summary.q1)},
            {"q3", num(r.summary.q3)},
            {"pass_fraction", num(r.summary.pass_fraction)}}},
          {"verdicts", r.verdicts},
          {"details", r.details},
          {"runtime_seconds", r.runtime_seconds},
          {"version", r.version}};
}

namespace {

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char ch : v) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const ExperimentReport& r) {
  std::size_t frame = 0;
  std::set<std::string> keys;
  for (const TrialRecord& t : r.trials) {
    frame = std::max(frame, t.subspace_frame.size());
    for (const auto& kv : t.estimates) keys.insert(kv.first);
  }
  std::ostringstream out;
  out << "trial_id,stream_id";
  for (std::size_t k = 0; k < frame; ++k) out << ",subspace_frame." << k;
  for (const auto& k : keys) out << "," << csv_field("estimates." + k);
  out << ",flags\n";
  for (const TrialRecord& t : r.trials) {
    out << t.trial_id << "," << t.stream_id;
    for (std::size_t k = 0; k < frame; ++k) {
      out << "," << (k < t.subspace_frame.size() ? csv_number(t.subspace_frame[k]) : "");
    }
    for (const auto& k : keys) {
      const auto it = t.estimates.find(k);
      out << "," << (it == t.estimates.end() ? "" : csv_number(it->second));
    }
    std::string flags;
    for (std::size_t i = 0; i < t.flags.size(); ++i) flags += (i ? ";" : "") + t.flags[i];
    out << "," << csv_field(flags) << "\n";
  }
  return out.str();
}

json strip_timing(json doc) {
  if (doc.is_object()) {
    doc.erase("runtime_seconds");
    doc.erase("timing");
    for (auto& [k, v] : doc.items()) v = strip_timing(v);
  } else if (doc.is_array()) {
    for (auto& v : doc) v = strip_timing(v);
  }
  return doc;
}

}  // namespace isoproj
