#include "renorm/lab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <regex>
#include <set>

#include <Eigen/Core>

#include "renorm/char_variety.hpp"
#include "renorm/circle.hpp"
#include "renorm/error.hpp"
#include "renorm/piet.hpp"

#ifndef RENORM_VERSION
#define RENORM_VERSION "0.0.0"
#endif

namespace renorm::lab {

namespace {

constexpr std::array<const char*, 6> kKindNames = {"converge", "attract", "dk",
                                                   "distortion", "dict", "rank"};

bool needs_map(StudyKind k) { return k != StudyKind::Dict && k != StudyKind::Rank; }

std::map<std::string, double> default_tolerances(StudyKind k) {
  switch (k) {
    case StudyKind::Converge: return {{"piet_d1", 1e-10}, {"ratio", 0.9}};
    case StudyKind::Attract: return {{"member_defect", 1e-9}, {"slope_factor", 2.0}};
    case StudyKind::Dk: return {};
    case StudyKind::Distortion: return {};
    case StudyKind::Dict: return {{"functoriality", 1e-9}, {"roundtrip", 1e-9}};
    case StudyKind::Rank: return {};
  }
  return {};
}

// Recognised params per kind, with their integer ranges.
struct IntParam {
  const char* key;
  int lo, hi, fallback;
};
std::vector<IntParam> int_params(StudyKind k) {
  switch (k) {
    case StudyKind::Converge: return {{"window", 3, 1000, 6}};
    case StudyKind::Attract: return {};
    case StudyKind::Dk:
      return {{"points", 1, 1 << 24, 1000}, {"mean_points", 1000, 1 << 30, 1'000'000}};
    case StudyKind::Distortion: return {{"samples", 2, 4096, 16}};
    case StudyKind::Dict: return {{"m_max", 2, 5, 5}, {"trials", 1, 10000, 20}};
    case StudyKind::Rank: return {{"d_max", 1, 3, 3}, {"trials", 1, 10000, 10}};
  }
  return {};
}

int param_int(const ExperimentSpec& s, const char* key) {
  for (const auto& p : int_params(s.kind)) {
    if (std::string(p.key) == key) return s.params.value(key, p.fallback);
  }
  throw Error(ErrorCode::SpecInvalid, std::string("unknown parameter ") + key);
}

// Two-sided 95% Student t quantiles, df = 1..30.
double t975(int df) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                     2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                     2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                     2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return std::nan("");
  if (df <= 30) return table[df - 1];
  return 1.96;
}

Flag make_flag(std::string name, bool hard, bool pass, std::string detail) {
  return {std::move(name), hard, pass, std::move(detail)};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double tol(const ExperimentSpec& s, const char* key) { return s.tolerances.at(key); }

// Rows for levels 1..depth.
void run_converge(const ExperimentSpec& s, StudyReport& r) {
  r.columns = {"n", "Delta_n", "d1", "affine_defect", "max_log_distortion", "above_floor"};
  const Giet g = to_giet(io::build_map(s.map), 0);
  const bool piet_input = g.is_piet();
  const ConvergenceStudy st =
      convergence_study(g, s.depth, precision_from_env(), param_int(s, "window"), s.budget);
  if (st.error) r.error = st.error->what();

  std::vector<int> ns;
  std::vector<double> deltas;
  double worst_d1 = 0.0;
  for (const auto& row : st.rows) {
    if (row.n < 1) continue;
    r.rows.push_back({double(row.n), row.delta, row.d1, row.affine_defect,
                      row.max_log_distortion, row.above_floor ? 1.0 : 0.0});
    ns.push_back(row.n);
    deltas.push_back(row.delta);
    worst_d1 = std::max(worst_d1, row.d1);
  }
  const Rate delta = fit_rate("Delta_n", ns, deltas);
  r.rates.push_back(delta);
  r.flags.push_back(make_flag("delta_slope_negative", true, delta.points >= 2 && delta.slope < 0,
                              "slope " + fmt(delta.slope)));

  if (piet_input) {
    r.flags.push_back(make_flag("piet_d1", true, !r.rows.empty() && worst_d1 <= tol(s, "piet_d1"),
                                "max d1 " + fmt(worst_d1)));
  } else {
    std::vector<int> wn;
    std::vector<double> wd;
    for (const auto& row : st.rows) {
      if (row.n >= st.window_first && row.n <= st.window_last) {
        wn.push_back(row.n);
        wd.push_back(row.d1);
      }
    }
    const Rate d1 = fit_rate("d1", wn, wd);
    r.rates.push_back(d1);
    r.flags.push_back(make_flag("d1_slope_negative", true, d1.points >= 2 && d1.slope < 0,
                                "slope " + fmt(d1.slope) + " over levels " +
                                    std::to_string(st.window_first) + ".." +
                                    std::to_string(st.window_last)));
    r.flags.push_back(make_flag("d1_ratio", false,
                                st.monotone_window && d1.points >= 2 && d1.ratio < tol(s, "ratio"),
                                "ratio " + fmt(d1.ratio) +
                                    (st.monotone_window ? ", monotone" : ", not monotone")));
  }
  r.flags.push_back(make_flag("tower_complete", false, !st.error,
                              st.error ? st.error->what() : "all levels built"));
}

void run_attract(const ExperimentSpec& s, StudyReport& r) {
  r.columns = {"n", "x_n", "affine_defect"};
  Piet p(to_giet(io::build_map(s.map), 0));
  const bool member = s.params.value("member", false);
  if (member) p = normalise_into_E(p).piet;
  const AttractionStudy st = attraction_study(p, s.depth, s.budget);
  if (st.error) r.error = st.error->what();

  std::vector<int> ns;
  std::vector<double> xs, ds;
  double worst = 0.0;
  for (const auto& row : st.rows) {
    if (row.n < 1) continue;
    r.rows.push_back({double(row.n), row.x, row.defect});
    ns.push_back(row.n);
    xs.push_back(row.x);
    ds.push_back(row.defect);
    worst = std::max(worst, row.defect);
  }
  if (member) {
    r.flags.push_back(make_flag("member_defect", true,
                                !r.rows.empty() && worst <= tol(s, "member_defect"),
                                "max defect " + fmt(worst)));
  } else {
    const Rate d = fit_rate("affine_defect", ns, ds);
    const Rate x = fit_rate("x_n", ns, xs);
    r.rates.push_back(d);
    r.rates.push_back(x);
    r.flags.push_back(make_flag("defect_slope_negative", true, d.points >= 2 && d.slope < 0,
                                "slope " + fmt(d.slope)));
    const double q = d.slope / x.slope, f = tol(s, "slope_factor");
    r.flags.push_back(make_flag("defect_tracks_x", false, q >= 1.0 / f && q <= f,
                                "slope ratio " + fmt(q)));
  }
  r.flags.push_back(make_flag("tower_complete", false, !st.error,
                              st.error ? st.error->what() : "all levels built"));
}

void run_dk(const ExperimentSpec& s, StudyReport& r) {
  r.columns = {"n", "q_n", "max_abs_sum", "variation", "bound", "residual", "holds"};
  const CircleMap t = io::build_map(s.map);
  const CircleObservable f = log_derivative_observable(t);
  DenjoyKoksmaOptions o;
  o.points = param_int(s, "points");
  o.mean_points = param_int(s, "mean_points");
  o.seed = s.seed;
  int failures = 0;
  for (int n = 1; n <= s.depth; ++n) {
    DenjoyKoksmaReport d;
    try {
      d = denjoy_koksma_check(t, f, n, o);
    } catch (const Error& e) {
      r.error = e.what();
      break;
    }
    r.rows.push_back({double(n), double(d.q), d.max_abs_sum, d.variation, d.bound, d.residual,
                      d.holds ? 1.0 : 0.0});
    if (!d.holds) ++failures;
  }
  r.flags.push_back(make_flag("denjoy_koksma", true, !r.rows.empty() && failures == 0,
                              std::to_string(failures) + " failing levels"));
  r.flags.push_back(make_flag("levels_complete", false, !r.error,
                              r.error ? *r.error : "all levels checked"));
}

void run_distortion(const ExperimentSpec& s, StudyReport& r) {
  r.columns = {"n", "letter", "return_time", "max_ratio", "bound", "slack", "holds"};
  const CircleMap t = io::build_map(s.map);
  const Giet cut = to_giet(t, 0);
  // Cut coordinates start at the first break.
  const double p0 = t.break_count() > 0 ? t.breaks()[0] : 0.0;
  const int samples = param_int(s, "samples");
  int failures = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  try {
    for (int n = 1; n <= s.depth; ++n) {
      const DynamicalPartition dp = dynamical_partition(cut, n);
      for (std::size_t a = 0; a < dp.base.size(); ++a) {
        const Interval j{dp.base[a].lo + p0, dp.base[a].hi + p0};
        const int steps = static_cast<int>(dp.return_times[a]) - 1;
        const DistortionReport d = distortion_bound_check(t, j, steps, samples);
        r.rows.push_back({double(n), double(a), double(dp.return_times[a]), d.max_ratio, d.bound,
                          d.slack, d.holds ? 1.0 : 0.0});
        if (!d.holds) ++failures;
        min_slack = std::min(min_slack, d.slack);
      }
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  r.flags.push_back(make_flag("ratio_bound", true, !r.rows.empty() && failures == 0,
                              std::to_string(failures) + " failures, min slack " +
                                  fmt(min_slack)));
  r.flags.push_back(make_flag("levels_complete", false, !r.error,
                              r.error ? *r.error : "all levels checked"));
}

double piet_distance(const Piet& a, const Piet& b) {
  double d = entrywise_distance(a.maps(), b.maps());
  const auto pa = a.points(), pb = b.points();
  for (std::size_t i = 0; i < pa.size(); ++i) d = std::max(d, std::fabs(pa[i] - pb[i]));
  return d;
}

void run_dict(const ExperimentSpec& s, StudyReport& r) {
  r.columns = {"m", "perm_index", "side", "trial", "functoriality_residual", "roundtrip_error"};
  std::mt19937_64 rng(s.seed);
  const int m_max = param_int(s, "m_max"), trials = param_int(s, "trials");
  double worst_f = 0.0, worst_r = 0.0;
  try {
    for (int m = 2; m <= m_max; ++m) {
      const auto cls = rauzy_class(rotation_permutation(m, 1));
      for (std::size_t i = 0; i < cls.size(); ++i) {
        for (Side side : {Side::Top, Side::Bottom}) {
          MarkedPermutation next;
          if (!rauzy_move(cls[i], side, next)) continue;
          RandomPietOptions o;
          o.separated = true;
          o.side = side;
          for (int k = 0; k < trials; ++k) {
            const Piet p = random_piet(cls[i], rng, o);
            const double fr = functoriality_residual(p);
            const double rt = piet_distance(p, psi_inverse(psi(p)));
            worst_f = std::max(worst_f, fr);
            worst_r = std::max(worst_r, rt);
            r.rows.push_back({double(m), double(i), side == Side::Top ? 0.0 : 1.0, double(k), fr,
                              rt});
          }
        }
      }
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  const bool ok = !r.error && !r.rows.empty();
  r.flags.push_back(make_flag("functoriality", true, ok && worst_f <= tol(s, "functoriality"),
                              "max residual " + fmt(worst_f)));
  r.flags.push_back(make_flag("roundtrip", true, ok && worst_r <= tol(s, "roundtrip"),
                              "max error " + fmt(worst_r)));
}

void run_rank(const ExperimentSpec& s, StudyReport& r) {
  r.columns = {"d", "trial", "ambient", "rank", "dimension", "dimension_unconstrained"};
  std::mt19937_64 rng(s.seed);
  const int d_max = param_int(s, "d_max"), trials = param_int(s, "trials");
  int failures = 0;
  try {
    for (int d = 1; d <= d_max; ++d) {
      RandomPietOptions o;
      o.separated = true;
      for (int k = 0; k < trials; ++k) {
        const AttractorPoint ap = normalise_into_E(random_piet(rotation_permutation(d + 1, 1), rng, o));
        const SliceAnalysis with = slice_analysis(ap, ap.sizes, true);
        const SliceAnalysis without = slice_analysis(ap, ap.sizes, false);
        r.rows.push_back({double(d), double(k), double(with.ambient), double(with.rank),
                          double(with.dimension), double(without.dimension)});
        if (with.dimension != 2 * d || without.dimension != 3 * d) ++failures;
      }
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  r.flags.push_back(make_flag("dimension_counts", true, !r.error && failures == 0,
                              std::to_string(failures) + " mismatches"));
}

Json nan_to_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

const char* to_string(StudyKind k) { return kKindNames[static_cast<int>(k)]; }

std::optional<StudyKind> parse_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (s == kKindNames[i]) return static_cast<StudyKind>(i);
  }
  return std::nullopt;
}

std::vector<std::string> validate(const Json& spec) {
  std::vector<std::string> issues;
  auto issue = [&](const std::string& path, const std::string& msg) {
    issues.push_back(path + ": " + msg);
  };
  if (!spec.is_object()) {
    issue("$", "spec must be a JSON object");
    return issues;
  }
  static const std::set<std::string> known = {"schema", "name",      "kind",    "map",
                                              "depth",  "seed",      "budget",  "tolerances",
                                              "out_dir", "params"};
  for (const auto& [key, _] : spec.items()) {
    if (!known.count(key)) issue(key, "unknown field");
  }
  if (spec.contains("schema") && spec.at("schema") != kExperimentSchema) {
    issue("schema", std::string("expected ") + kExperimentSchema);
  }
  if (spec.contains("name")) {
    static const std::regex ok("[A-Za-z0-9_.-]+");
    if (!spec.at("name").is_string() || !std::regex_match(spec.at("name").get<std::string>(), ok)) {
      issue("name", "must be a file-name safe string");
    }
  }
  std::optional<StudyKind> kind;
  if (!spec.contains("kind")) {
    issue("kind", "required");
  } else if (!spec.at("kind").is_string() ||
             !(kind = parse_kind(spec.at("kind").get<std::string>()))) {
    issue("kind", "must be one of converge, attract, dk, distortion, dict, rank");
  }
  if (!spec.contains("seed")) {
    issue("seed", "required");
  } else if (!spec.at("seed").is_number_integer() || spec.at("seed").get<long long>() < 0) {
    issue("seed", "must be a non-negative integer");
  }
  if (spec.contains("depth")) {
    const Json& d = spec.at("depth");
    if (!d.is_number_integer()) {
      issue("depth", "must be an integer");
    } else if (d.get<long long>() < 1) {
      issue("depth", "depth must be ≥ 1");
    }
  } else if (kind && needs_map(*kind)) {
    issue("depth", "required");
  }
  if (spec.contains("budget") &&
      !(spec.at("budget").is_number_integer() && spec.at("budget").get<long long>() >= 1)) {
    issue("budget", "must be a positive integer");
  }
  if (spec.contains("out_dir") && !spec.at("out_dir").is_string()) {
    issue("out_dir", "must be a string");
  }
  if (kind) {
    if (needs_map(*kind)) {
      if (!spec.contains("map")) {
        issue("map", "required");
      } else {
        for (auto& s : io::validate_map_spec(spec.at("map"), "map")) issues.push_back(s);
        if (*kind == StudyKind::Attract && spec.at("map").value("bump", 0.0) > 0.0) {
          issue("map.bump", "attract needs a piecewise Moebius map");
        }
      }
    } else if (spec.contains("map")) {
      issue("map", std::string("not used by kind ") + to_string(*kind));
    }
    if (spec.contains("tolerances")) {
      const Json& t = spec.at("tolerances");
      const auto defaults = default_tolerances(*kind);
      if (!t.is_object()) {
        issue("tolerances", "must be an object");
      } else {
        for (const auto& [key, v] : t.items()) {
          if (!defaults.count(key)) {
            issue("tolerances." + key, "unknown tolerance for this kind");
          } else if (!v.is_number() || !(v.get<double>() > 0.0)) {
            issue("tolerances." + key, "must be a positive number");
          }
        }
      }
    }
    if (spec.contains("params")) {
      const Json& p = spec.at("params");
      if (!p.is_object()) {
        issue("params", "must be an object");
      } else {
        const auto ints = int_params(*kind);
        for (const auto& [key, v] : p.items()) {
          if (*kind == StudyKind::Attract && key == "member") {
            if (!v.is_boolean()) issue("params.member", "must be a boolean");
            continue;
          }
          auto it = std::find_if(ints.begin(), ints.end(),
                                 [&](const IntParam& q) { return key == q.key; });
          if (it == ints.end()) {
            issue("params." + key, "unknown parameter for this kind");
          } else if (!v.is_number_integer() || v.get<long long>() < it->lo ||
                     v.get<long long>() > it->hi) {
            issue("params." + key, "must be an integer in [" + std::to_string(it->lo) + ", " +
                                       std::to_string(it->hi) + "]");
          }
        }
      }
    }
  }
  return issues;
}

ExperimentSpec parse_spec(const Json& spec) {
  const auto issues = validate(spec);
  if (!issues.empty()) throw Error(ErrorCode::SpecInvalid, issues.front());
  ExperimentSpec s;
  s.kind = *parse_kind(spec.at("kind").get<std::string>());
  s.name = spec.value("name", std::string(to_string(s.kind)));
  if (spec.contains("map")) s.map = spec.at("map");
  s.depth = spec.value("depth", 1);
  s.seed = spec.at("seed").get<std::uint64_t>();
  s.budget = spec.value("budget", kDefaultStepBudget);
  s.tolerances = default_tolerances(s.kind);
  if (spec.contains("tolerances")) {
    for (const auto& [key, v] : spec.at("tolerances").items()) s.tolerances[key] = v.get<double>();
  }
  s.out_dir = spec.value("out_dir", std::string("."));
  if (spec.contains("params")) s.params = spec.at("params");
  return s;
}

Json to_json(const ExperimentSpec& s) {
  Json j = {{"schema", kExperimentSchema}, {"name", s.name},     {"kind", to_string(s.kind)},
            {"depth", s.depth},            {"seed", s.seed},     {"budget", s.budget},
            {"tolerances", s.tolerances},  {"out_dir", s.out_dir}, {"params", s.params}};
  if (!s.map.is_null()) j["map"] = s.map;
  return j;
}

Rate fit_rate(const std::string& name, const std::vector<int>& n,
              const std::vector<double>& values) {
  Rate r;
  r.name = name;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n.size() && i < values.size(); ++i) {
    if (values[i] > 0.0 && std::isfinite(values[i])) {
      xs.push_back(n[i]);
      ys.push_back(std::log(values[i]));
    }
  }
  const int k = static_cast<int>(xs.size());
  r.points = k;
  const double nan = std::nan("");
  if (k < 2) {
    r.slope = r.ratio = r.ci_low = r.ci_high = r.r2 = nan;
    return r;
  }
  double mx = 0, my = 0;
  for (int i = 0; i < k; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  r.slope = sxy / sxx;
  r.ratio = std::exp(r.slope);
  const double sse = std::max(0.0, syy - r.slope * sxy);
  r.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  if (k > 2) {
    const double se = std::sqrt(sse / (k - 2) / sxx);
    r.ci_low = r.slope - t975(k - 2) * se;
    r.ci_high = r.slope + t975(k - 2) * se;
  } else {
    r.ci_low = r.ci_high = nan;
  }
  return r;
}

bool StudyReport::passed() const {
  return std::all_of(flags.begin(), flags.end(), [](const Flag& f) { return !f.hard || f.pass; });
}

StudyReport run(const ExperimentSpec& spec) {
  if (spec.depth < 1) throw Error(ErrorCode::SpecInvalid, "depth: depth must be ≥ 1");
  StudyReport r;
  r.spec = spec;
  r.environment = {{"precision", to_string(precision_from_env())},
                   {"budget", spec.budget},
                   {"version", RENORM_VERSION},
                   {"compiler", __VERSION__},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  try {
    switch (spec.kind) {
      case StudyKind::Converge: run_converge(spec, r); break;
      case StudyKind::Attract: run_attract(spec, r); break;
      case StudyKind::Dk: run_dk(spec, r); break;
      case StudyKind::Distortion: run_distortion(spec, r); break;
      case StudyKind::Dict: run_dict(spec, r); break;
      case StudyKind::Rank: run_rank(spec, r); break;
    }
  } catch (const Error& e) {
    // Map construction or the first level failed; nothing to keep.
    if (e.code() == ErrorCode::SpecInvalid) throw;
    r.error = e.what();
    r.flags.push_back(make_flag("study_started", true, false, e.what()));
  }
  return r;
}

std::string to_csv(const StudyReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    if (i) out += ',';
    out += report.columns[i];
  }
  out += '\n';
  char buf[64];
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      const double v = row[i];
      if (std::isnan(v)) {
        out += "nan";
      } else if (std::isinf(v)) {
        out += v > 0 ? "inf" : "-inf";
      } else if (v == std::floor(v) && std::fabs(v) < 9.0e15) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
        out += buf;
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

Json to_json(const StudyReport& report) {
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    Json r = Json::array();
    for (double v : row) r.push_back(nan_to_null(v));
    rows.push_back(r);
  }
  Json rates = Json::array();
  for (const auto& r : report.rates) {
    rates.push_back({{"name", r.name},
                     {"slope", nan_to_null(r.slope)},
                     {"ratio", nan_to_null(r.ratio)},
                     {"ci95", {nan_to_null(r.ci_low), nan_to_null(r.ci_high)}},
                     {"r2", nan_to_null(r.r2)},
                     {"points", r.points}});
  }
  Json flags = Json::array();
  for (const auto& f : report.flags) {
    flags.push_back({{"name", f.name}, {"hard", f.hard}, {"pass", f.pass}, {"detail", f.detail}});
  }
  return {{"schema", kReportSchema},
          {"spec", to_json(report.spec)},
          {"csv_schema", std::string(to_string(report.spec.kind)) + "/1"},
          {"columns", report.columns},
          {"rows", rows},
          {"rates", rates},
          {"flags", flags},
          {"environment", report.environment},
          {"error", report.error ? Json(*report.error) : Json(nullptr)},
          {"passed", report.passed()}};
}

OutputPaths write_outputs(const StudyReport& report) {
  const std::filesystem::path dir(report.spec.out_dir);
  OutputPaths paths{(dir / (report.spec.name + ".csv")).string(),
                    (dir / (report.spec.name + ".json")).string()};
  io::write_text_atomic(paths.csv, to_csv(report));
  io::write_text_atomic(paths.json, to_json(report).dump(2) + "\n");
  return paths;
}

}  // namespace renorm::lab
