// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "renorm/branch.hpp"
#include "renorm/char_variety.hpp"
#include "renorm/circle.hpp"
#include "renorm/error.hpp"
#include "renorm/giet.hpp"
#include "renorm/moebius.hpp"
#include "renorm/piet.hpp"
#include "test_util.hpp"

namespace {

using namespace renorm;

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
const double kSilver = std::sqrt(2.0) - 1.0;

struct BreakSet {
  const char* name;
  std::vector<double> breaks;
  std::vector<double> sizes;
};
const std::vector<BreakSet> kBreakSets = {
    {"one-break", {0.0}, {2.0}},
    {"two-break", {0.0, 0.4}, {2.0, 0.7}},
    {"three-break", {0.0, 0.3, 0.7}, {1.5, 0.6, 1.4}},
};

CircleMap golden_map(const BreakSet& b, double bump = 0.0, int digits = 30) {
  BreakMapOptions o;
  o.bump = bump;
  o.seed = 3;
  return make_break_map_with_rotation(b.breaks, b.sizes, kGolden, o, digits);
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void denjoy_koksma(Outcome& o) {
  std::vector<std::pair<std::string, CircleMap>> maps = {
      {"golden rotation", CircleMap::rotation(kGolden)},
      {"silver rotation", CircleMap::rotation(kSilver)}};
  for (const auto& b : kBreakSets) maps.emplace_back(b.name, golden_map(b));
  DenjoyKoksmaOptions opt;
  opt.points = 1000;
  double worst = 0.0;  // max |sum| / bound
  int checks = 0;
  for (const auto& [name, t] : maps) {
    const CircleObservable f = log_derivative_observable(t);
    for (int n = 1; n <= 8; ++n) {
      const DenjoyKoksmaReport r = denjoy_koksma_check(t, f, n, opt);
      ++checks;
      o.require(r.holds, name + " level " + std::to_string(n));
      if (r.bound > 0) worst = std::max(worst, r.max_abs_sum / r.bound);
    }
  }
  o.detail << checks << " (map, level) pairs x 1000 points, worst |sum|/bound " << g(worst);
}

void distortion(Outcome& o) {
  // Ratio bound exp(Var log DT) on every base interval of levels 1..10; the orbits are the
  // level-n partition elements.
  std::vector<std::pair<std::string, CircleMap>> maps;
  for (const auto& b : kBreakSets) maps.emplace_back(b.name, golden_map(b));
  maps.emplace_back("perturbed one-break", golden_map(kBreakSets[0], 2e-3, 22));
  double min_slack = INFINITY;
  int elements = 0;
  for (const auto& [name, t] : maps) {
    const Giet cut = to_giet(t, 0);
    const double p0 = t.breaks()[0];
    for (int n = 1; n <= 10; ++n) {
      const DynamicalPartition dp = dynamical_partition(cut, n);
      for (std::size_t a = 0; a < dp.base.size(); ++a) {
        const Interval j{dp.base[a].lo + p0, dp.base[a].hi + p0};
        const DistortionReport r =
            distortion_bound_check(t, j, static_cast<int>(dp.return_times[a]) - 1);
        elements += static_cast<int>(dp.return_times[a]);
        o.require(r.holds, name + " level " + std::to_string(n));
        min_slack = std::min(min_slack, r.slack);
      }
    }
  }
  o.detail << "bound1: " << elements << " elements, min slack " << g(min_slack);

  // Normalised branches: sup|N(f)''| <= sup(1/f') sup|f''| |I|, 1% grid slack.
  std::mt19937_64 rng(202);
  double worst_norm = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double lo = testing::uniform(rng, 0.0, 0.5);
    const BranchFunction f =
        testing::random_chain(rng, 6).restrict({lo, lo + testing::uniform(rng, 0.1, 0.5)});
    const IntervalNorms n = norms(f);
    const double lhs = norms(normalise(f)).sup_d2;
    const double rhs = (1.0 / n.inf_d1) * n.sup_d2 * f.domain().length();
    worst_norm = std::max(worst_norm, lhs / rhs);
    o.require(lhs <= 1.01 * rhs, "normalised inequality, trial " + std::to_string(trial));
  }
  o.detail << "; normalised: worst lhs/rhs " << g(worst_norm);

  // Second-derivative recursion against long double finite differences.
  double worst_fd = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const BranchFunction f = testing::random_chain(rng, 6);
    for (int i = 0; i < 5; ++i) {
      const long double x = testing::uniform(rng, 0.05, 0.95), h = 1e-5L;
      const long double fp = f.jet<long double>(x + h).v, f0 = f.jet<long double>(x).v,
                        fm = f.jet<long double>(x - h).v;
      const double fd = static_cast<double>((fp - 2 * f0 + fm) / (h * h));
      const double d2 = f.jet(static_cast<double>(x)).d2;
      const double rel = std::fabs(d2 - fd) / std::max(1.0, std::fabs(fd));
      worst_fd = std::max(worst_fd, rel);
    }
  }
  o.require(worst_fd <= 1e-6, "second derivative recursion");
  o.detail << "; recursion vs finite differences: worst rel " << g(worst_fd);
}

void partition_decay_suite(Outcome& o) {
  std::vector<std::pair<std::string, Giet>> maps = {{"golden rotation", Giet::rotation(kGolden)}};
  for (const auto& b : kBreakSets) maps.emplace_back(b.name, to_giet(golden_map(b), 0));
  // Oracle for the rigid rotation: q_n of the golden mean are Fibonacci
  // numbers and one level consumes two digits, so the mesh ratio is F_k / F_{k+2}.
  double f0 = 1, f1 = 1;
  for (int k = 0; k < 30; ++k) {
    const double f2 = f0 + f1;
    f0 = f1;
    f1 = f2;
  }
  const double oracle = f0 / (f0 + f1);
  for (const auto& [name, t] : maps) {
    const DecayFit fit = partition_decay(t, 14);  // levels 2..14
    o.detail << name << " alpha " << g(fit.alpha) << " R2 " << g(fit.r2) << "; ";
    o.require(fit.deltas.size() == 15u && !fit.floor_hit, name + " levels 0..14");
    o.require(fit.alpha > 0.0 && fit.alpha < 1.0 && fit.r2 > 0.99, name);
    if (name == "golden rotation") {
      o.detail << "oracle " << g(oracle) << "; ";
      o.require(std::fabs(fit.alpha - oracle) <= 0.02, "golden alpha");
    }
  }
}

void convergence_to_P(Outcome& o) {
  for (const auto& b : {kBreakSets[0], kBreakSets[1]}) {
    // Pure piecewise Moebius input stays on P.
    const ConvergenceStudy pure = convergence_study(to_giet(golden_map(b), 0), 12);
    double worst = 0.0;
    for (const auto& r : pure.rows) worst = std::max(worst, r.d1);
    o.require(!pure.error && pure.rows.size() == 13u, std::string(b.name) + " PIET tower");
    o.require(worst <= 1e-10, std::string(b.name) + " PIET d1");

    const auto t0 = std::chrono::steady_clock::now();
    const int depth = 12;
    const Giet pert = to_giet(golden_map(b, 2e-3, 2 * depth + 2), 0);
    const ConvergenceStudy st = convergence_study(pert, depth);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int window = st.window_last - st.window_first + 1;
    o.detail << b.name << ": PIET max d1 " << g(worst) << ", perturbed levels "
             << st.window_first << ".." << st.window_last << " slope " << g(st.d1_fit.slope)
             << " ratio " << g(st.d1_fit.ratio()) << (st.monotone_window ? " monotone" : "")
             << ", " << g(secs) << " s; ";
    o.require(window >= 6, std::string(b.name) + " window");
    o.require(st.d1_fit.slope < 0.0 && st.d1_fit.ratio() < 0.9 && st.monotone_window,
              std::string(b.name) + " perturbed decay");
    o.require(secs < 300.0, std::string(b.name) + " runtime");
  }
}

void c2_probe(Outcome& o) {
  auto sup_d2 = [](const Giet& t) {
    double s = 0.0;
    for (const auto& f : t.branches()) s = std::max(s, norms(f).sup_d2);
    return s;
  };
  std::vector<std::pair<std::string, Giet>> maps = {
      {"perturbed one-break", to_giet(golden_map(kBreakSets[0], 2e-3, 26), 0)},
      {"perturbed two-break", to_giet(golden_map(kBreakSets[1], 2e-3, 26), 0)},
      {"three-break", to_giet(golden_map(kBreakSets[2]), 0)}};
  for (const auto& [name, t] : maps) {
    const Tower tower = build_tower(t, 12, false);
    o.require(tower.levels.size() == 13u, name + " tower");
    double early = 0.0, all = 0.0;
    for (std::size_t n = 0; n < tower.levels.size(); ++n) {
      const double s = sup_d2(tower.levels[n].giet);
      if (n <= 3) early = std::max(early, s);
      all = std::max(all, s);
    }
    o.detail << name << " max/early " << g(all / early) << "; ";
    o.require(all < 5.0 * early, name);
  }
}

double piet_distance(const Piet& a, const Piet& b) {
  double d = entrywise_distance(a.maps(), b.maps());
  const auto pa = a.points(), pb = b.points();
  for (std::size_t i = 0; i < pa.size(); ++i) d = std::max(d, std::fabs(pa[i] - pb[i]));
  return d;
}

Piet separated_piet(const MarkedPermutation& pi, std::mt19937_64& rng,
                    std::optional<Side> side = {}) {
  RandomPietOptions opt;
  opt.separated = true;
  opt.side = side;
  return random_piet(pi, rng, opt);
}

void dictionary(Outcome& o) {
  std::mt19937_64 rng(606);
  double roundtrip = 0.0, functor = 0.0, traces = 0.0;
  int pairs = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto cls = rauzy_class(rotation_permutation(2 + trial % 4, 1));
    const Piet p = separated_piet(cls[rng() % cls.size()], rng);
    roundtrip = std::max(roundtrip, piet_distance(p, psi_inverse(psi(p))));
    const auto tr = puncture_traces(psi(p));
    const auto sizes = break_sizes(p);
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      traces = std::max(traces, std::fabs(tr[j] - trace_from_break_size(sizes[j])));
    }
  }
  for (int m = 2; m <= 5; ++m) {
    for (const auto& pi : rauzy_class(rotation_permutation(m, 1))) {
      for (Side side : {Side::Top, Side::Bottom}) {
        MarkedPermutation next;
        if (!rauzy_move(pi, side, next)) continue;
        ++pairs;
        for (int k = 0; k < 20; ++k) {
          RandomPietOptions opt;
          opt.side = side;
          functor = std::max(functor, functoriality_residual(random_piet(pi, rng, opt)));
        }
      }
    }
  }
  o.detail << "round trip " << g(roundtrip) << ", functoriality " << g(functor) << " over "
           << pairs << " (pi, move) pairs, traces " << g(traces);
  o.require(roundtrip <= 1e-9, "round trip");
  o.require(functor <= 1e-9, "functoriality");
  o.require(traces <= 1e-9, "puncture traces");
}

void attractor(Outcome& o) {
  double member = 0.0;
  for (const auto& b : kBreakSets) {
    const Piet p(to_giet(golden_map(b), 0));
    const AttractionStudy in_family = attraction_study(normalise_into_E(p).piet, 10);
    o.require(!in_family.error && in_family.rows.size() == 11u, std::string(b.name) + " member tower");
    for (const auto& r : in_family.rows) member = std::max(member, r.defect);

    const AttractionStudy st = attraction_study(p, 10);
    const double q = st.defect_fit.slope / st.x_fit.slope;
    o.detail << b.name << " defect/x slope " << g(q) << "; ";
    o.require(!st.error && st.defect_fit.slope < 0.0 && q > 0.5 && q < 2.0,
              std::string(b.name) + " attraction");
  }
  o.detail << "member defect " << g(member) << "; ";
  o.require(member <= 1e-9, "invariance");

  std::mt19937_64 rng(707);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Piet p = separated_piet(rotation_permutation(2 + trial % 3, 1), rng);
    std::vector<double> lx, ly;
    for (double l : {1e-1, 1e-2, 1e-3, 1e-4}) {
      lx.push_back(std::log(l));
      ly.push_back(std::log(g_lambda_defect(p, l)));
    }
    double mx = 0, my = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i] / lx.size();
      my += ly[i] / ly.size();
    }
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    worst = std::max(worst, std::fabs(sxy / sxx - 1.0));
  }
  o.detail << "g_lambda log-log slope within " << g(worst) << " of 1";
  o.require(worst <= 0.05, "g_lambda linearity");
}

void dimension_counts(Outcome& o) {
  std::mt19937_64 rng(808);
  for (int d = 1; d <= 3; ++d) {
    int with = 0, without = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const AttractorPoint ap = normalise_into_E(separated_piet(rotation_permutation(d + 1, 1), rng));
      with += slice_constraint_rank(ap, ap.sizes, true) == 2 * d;
      without += slice_constraint_rank(ap, ap.sizes, false) == 3 * d;
    }
    o.detail << "d=" << d << ": " << with << "/10 at 2d, " << without << "/10 at 3d; ";
    o.require(with == 10 && without == 10, "d = " + std::to_string(d));
  }
}

RauzyPath random_path(const MarkedPermutation& start, int n, std::mt19937_64& rng) {
  RauzyPath path{start, {}};
  MarkedPermutation pi = start;
  for (int k = 0; k < n; ++k) {
    Side side = (rng() & 1) ? Side::Top : Side::Bottom;
    MarkedPermutation next;
    RauzyMove mv;
    if (!rauzy_move(pi, side, next, &mv)) {
      side = side == Side::Top ? Side::Bottom : Side::Top;
      rauzy_move(pi, side, next, &mv);
    }
    path.moves.push_back(mv);
    pi = next;
  }
  return path;
}

void trace_invariance(Outcome& o) {
  std::mt19937_64 rng(909);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto cls = rauzy_class(rotation_permutation(2 + trial % 4, 1));
    const Piet p = random_piet(cls[rng() % cls.size()], rng);
    const auto report = mcg_invariance_probe(psi(p), random_path(p.perm(), 10, rng), {});
    worst = std::max(worst, report.puncture_drift);
  }
  o.detail << "50 representations, 10-step paths, max puncture-trace drift " << g(worst);
  o.require(worst <= 1e-8, "drift");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"Denjoy-Koksma suite", denjoy_koksma},
      {"distortion suite", distortion},
      {"partition decay", partition_decay_suite},
      {"convergence to P", convergence_to_P},
      {"C2-bound probe", c2_probe},
      {"dictionary suite", dictionary},
      {"attractor suite", attractor},
      {"dimension counts", dimension_counts},
      {"trace invariance", trace_invariance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("CRITERION %zu %s: %s -- %s (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
