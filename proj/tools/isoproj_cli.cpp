#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "isoproj/errors.hpp"
#include "isoproj/experiment.hpp"
#include "isoproj/selftest.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAcceptance = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
  unsigned repeat_threads = 2;
  std::string format = "json";
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

int run_experiment_command(const std::string& kind, const Flags& flags) {
  isoproj::ExperimentConfig config;
  try {
    if (flags.config.empty()) throw isoproj::ConfigError("--config is required");
    std::ifstream in(flags.config);
    if (!in) throw isoproj::ConfigError("cannot read config " + flags.config);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw isoproj::ConfigError(flags.config + ": " + e.what());
    }
    config = isoproj::parse_config_unseeded(doc);
    if (flags.seed) config.seed = flags.seed;
    if (!config.seed) throw isoproj::ConfigError("seed missing: set it in the config or pass --seed");
    if (config.experiment != kind) {
      throw isoproj::ConfigError("config is for '" + config.experiment + "', not '" + kind + "'");
    }
    isoproj::validate(config);
  } catch (const isoproj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const isoproj::ExperimentReport report = isoproj::run_experiment(config, {flags.threads});
  const std::string out = flags.out.empty() ? config.output : flags.out;
  if (flags.format == "csv") {
    write_output(out, isoproj::to_csv(report));
  } else {
    write_output(out, isoproj::to_json(report).dump(2) + "\n");
  }
  for (const auto& [name, verdict] : report.verdicts) std::cerr << name << ": " << verdict << "\n";
  return 0;
}

int run_selftest_command(const Flags& flags) {
  const std::uint64_t seed = flags.seed.value_or(isoproj::kDefaultSelftestSeed);
  unsigned second = flags.repeat_threads;
  if (second == flags.threads) ++second;
  const isoproj::SelftestResult result =
      isoproj::run_acceptance(seed, flags.threads, second, [](const isoproj::CriterionResult& r) {
        std::cout << isoproj::format_line(r) << std::endl;
      });
  if (!flags.out.empty()) write_output(flags.out, result.to_json().dump(2) + "\n");
  std::cout << (result.passed() ? "selftest passed" : "selftest FAILED") << std::endl;
  return result.passed() ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isotropic projection and slicing experiments"};
  app.require_subcommand(1);
  Flags flags;

  const char* kinds[] = {"project", "intersect", "slice", "disintegrate", "heisenberg"};
  for (const char* kind : kinds) {
    auto* sub = app.add_subcommand(kind, std::string("run the ") + kind + " experiment");
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--seed", flags.seed, "overrides the config seed");
    sub->add_option("--out", flags.out, "report path (default: config output, else stdout)");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", flags.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  }
  auto* self = app.add_subcommand("selftest", "run the acceptance suite");
  self->add_option("--seed", flags.seed, "suite seed");
  self->add_option("--out", flags.out, "write the suite report as JSON");
  self->add_option("--threads", flags.threads, "threads for the first pass")->check(CLI::PositiveNumber);
  self->add_option("--repeat-threads", flags.repeat_threads, "threads for the reproducibility pass")
      ->check(CLI::PositiveNumber);
  self->add_option("--format", flags.format, "report format")->check(CLI::IsMember({"json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "selftest") return run_selftest_command(flags);
    return run_experiment_command(name, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
