#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "renorm/giet.hpp"
#include "renorm/serialize.hpp"

// Experiment driver behind the `renorm` command line tool.
namespace renorm::lab {

using Json = nlohmann::json;

inline constexpr const char* kExperimentSchema = "renorm.experiment/1";
inline constexpr const char* kReportSchema = "renorm.report/1";

enum class StudyKind { Converge, Attract, Dk, Distortion, Dict, Rank };
const char* to_string(StudyKind k);
std::optional<StudyKind> parse_kind(std::string_view s);

struct ExperimentSpec {
  std::string name = "study";
  StudyKind kind = StudyKind::Converge;
  Json map;  // map spec; unused by dict and rank
  int depth = 1;
  std::uint64_t seed = 0;
  std::int64_t budget = kDefaultStepBudget;
  std::map<std::string, double> tolerances;  // kind defaults merged with the document
  std::string out_dir = ".";
  Json params = Json::object();  // kind-specific extras
};

// Schema issues as "path: message"; empty means runnable.
std::vector<std::string> validate(const Json& spec);
// Throws SpecInvalid carrying the first issue.
ExperimentSpec parse_spec(const Json& spec);
Json to_json(const ExperimentSpec& spec);

struct Rate {
  std::string name;
  double slope = 0.0;  // of log(value) against n
  double ratio = 0.0;  // exp(slope)
  double ci_low = 0.0;  // 95% interval for the slope
  double ci_high = 0.0;
  double r2 = 0.0;
  int points = 0;
};

struct Flag {
  std::string name;
  bool hard = true;
  bool pass = false;
  std::string detail;
};

struct StudyReport {
  ExperimentSpec spec;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<Rate> rates;
  std::vector<Flag> flags;
  Json environment;
  std::optional<std::string> error;  // propagated failure; earlier rows are kept

  bool passed() const;  // every hard flag passes
};

StudyReport run(const ExperimentSpec& spec);

std::string to_csv(const StudyReport& report);
Json to_json(const StudyReport& report);

struct OutputPaths {
  std::string csv;
  std::string json;
};
// <out_dir>/<name>.csv and <out_dir>/<name>.json, each written atomically.
OutputPaths write_outputs(const StudyReport& report);

// 95% interval slope fit of log(values) against n.
Rate fit_rate(const std::string& name, const std::vector<int>& n,
              const std::vector<double>& values);

}  // namespace renorm::lab
