#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "renorm/char_variety.hpp"
#include "renorm/circle.hpp"
#include "renorm/error.hpp"
#include "renorm/lab.hpp"
#include "renorm/piet.hpp"
#include "renorm/serialize.hpp"

// Exit codes: 0 all hard flags pass, 1 a hard flag failed, 2 invalid spec or
// usage, 3 any other library error.
namespace {

using renorm::lab::Json;

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> depth;
  std::optional<std::int64_t> budget;

  void apply(Json& spec) const {
    if (!spec.is_object()) return;
    if (out_dir) spec["out_dir"] = *out_dir;
    if (seed) spec["seed"] = *seed;
    if (depth) spec["depth"] = *depth;
    if (budget) spec["budget"] = *budget;
  }
};

int print_issues(const std::vector<std::string>& issues) {
  for (const auto& s : issues) std::cerr << s << "\n";
  return issues.empty() ? 0 : 2;
}

int cmd_validate(const std::string& path, const Overrides& ov) {
  Json spec = renorm::io::read_json_file(path);
  ov.apply(spec);
  const auto issues = renorm::lab::validate(spec);
  if (issues.empty()) std::cout << path << ": ok\n";
  return print_issues(issues);
}

int cmd_run(const std::string& path, const Overrides& ov) {
  Json spec = renorm::io::read_json_file(path);
  ov.apply(spec);
  if (int rc = print_issues(renorm::lab::validate(spec))) return rc;
  const auto report = renorm::lab::run(renorm::lab::parse_spec(spec));
  const auto paths = renorm::lab::write_outputs(report);
  for (const auto& f : report.flags) {
    std::cout << (f.pass ? "PASS " : "FAIL ") << (f.hard ? "hard " : "soft ") << f.name << ": "
              << f.detail << "\n";
  }
  if (report.error) std::cout << "error: " << *report.error << "\n";
  std::cout << "wrote " << paths.csv << " and " << paths.json << "\n";
  return report.passed() ? 0 : 1;
}

Json load_map(const std::string& path) {
  Json spec = renorm::io::read_json_file(path);
  // An experiment spec is accepted too; its map is used.
  if (spec.is_object() && spec.contains("kind") && spec.contains("map")) spec = spec.at("map");
  return spec;
}

int cmd_digits(const std::string& path, int n, std::int64_t budget) {
  const auto map = renorm::io::build_map(load_map(path));
  const auto ex = renorm::expand_digits(renorm::to_giet(map, 0), n, 1e300, budget);
  Json out = {{"digits", ex.digits}, {"steps", ex.steps}};
  Json conv = Json::array();
  for (const auto& c : renorm::convergents(ex.digits)) conv.push_back({c.p, c.q});
  out["convergents"] = conv;
  if (!ex.digits.empty()) out["value"] = renorm::cf_value(ex.digits);
  if (ex.stop) out["stop"] = ex.stop->what();
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_rep(const std::string& path) {
  const auto map = renorm::io::build_map(load_map(path));
  const renorm::Piet p(renorm::to_giet(map, 0));
  const auto rep = renorm::psi(p);
  Json out = renorm::io::to_json(rep);
  out["puncture_traces"] = renorm::puncture_traces(rep);
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renormalisation experiments for circle maps with breaks"};
  app.require_subcommand(1);
  Overrides ov;
  std::string path;
  int n_digits = 20;
  std::int64_t budget = renorm::kDefaultStepBudget;

  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--out-dir", ov.out_dir, "Directory for the CSV and JSON outputs");
    sub->add_option("--seed", ov.seed, "Override the spec seed");
    sub->add_option("--depth", ov.depth, "Override the spec depth");
    sub->add_option("--budget", ov.budget, "Override the induction step budget");
  };
  auto* run = app.add_subcommand("run", "Run an experiment spec");
  run->add_option("spec", path, "Experiment spec (JSON)")->required();
  add_overrides(run);
  auto* validate = app.add_subcommand("validate", "Check an experiment spec");
  validate->add_option("spec", path, "Experiment spec (JSON)")->required();
  add_overrides(validate);
  auto* digits = app.add_subcommand("digits", "Continued-fraction digits of a map");
  digits->add_option("map", path, "Map spec (JSON)")->required();
  digits->add_option("--n", n_digits, "Number of digits")->check(CLI::PositiveNumber);
  digits->add_option("--budget", budget, "Induction step budget")->check(CLI::PositiveNumber);
  auto* rep = app.add_subcommand("rep", "Representation of a piecewise Moebius map");
  rep->add_option("map", path, "Map spec (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(path, ov);
    if (*validate) return cmd_validate(path, ov);
    if (*digits) return cmd_digits(path, n_digits, budget);
    if (*rep) return cmd_rep(path);
  } catch (const renorm::Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == renorm::ErrorCode::SpecInvalid ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
