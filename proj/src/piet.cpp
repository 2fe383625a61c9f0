#include "renorm/piet.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>

#include "renorm/char_variety.hpp"

namespace renorm {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool pole_free(const Moebius& g, Interval iv) {
  // c x + d keeps one sign on the closed interval.
  const double lo = g.c() * iv.lo + g.d();
  const double hi = g.c() * iv.hi + g.d();
  return lo * hi > 0.0;
}

}  // namespace

Piet::Piet(Giet g) : giet_(std::move(g)) {
  maps_.reserve(giet_.size());
  for (Letter a = 0; a < giet_.size(); ++a) {
    const BranchFunction& f = giet_.branch(a);
    if (!f.single_chain() || !f.is_moebius()) {
      throw Error(ErrorCode::SpecInvalid, "branch " + std::to_string(a) + " is not Moebius");
    }
    maps_.push_back(f.as_moebius());
    const Interval dom = f.domain();
    for (int i = 0; i <= 64; ++i) {
      const double x = dom.at(i / 64.0);
      const double want = f.eval(x);
      if (std::fabs(maps_.back().apply(x) - want) > 1e-11 * std::max(1.0, std::fabs(want))) {
        throw Error(ErrorCode::SpecInvalid, "branch disagrees with its Moebius map");
      }
    }
  }
}

Piet::Piet(const MarkedPermutation& perm, const std::vector<double>& points,
           const std::vector<Moebius>& maps) {
  const int m = perm.size();
  if (static_cast<int>(points.size()) != m + 1 || static_cast<int>(maps.size()) != m) {
    throw Error(ErrorCode::SpecInvalid, "expected m + 1 points and m maps");
  }
  std::vector<BranchFunction> br(m);
  for (int i = 0; i < m; ++i) {
    const Letter a = perm.top[i];
    const Interval iv{points[i], points[i + 1]};
    if (!(iv.lo < iv.hi)) throw Error(ErrorCode::OrderViolation, "points not increasing");
    if (!pole_free(maps[a], iv)) throw Error(ErrorCode::PoleAt, "pole inside a branch");
    br[a] = BranchFunction::moebius(iv, maps[a]);
  }
  giet_ = Giet(perm, std::move(br));
  maps_ = maps;
}

Interval Piet::domain() const {
  const auto& top = perm().top;
  return {giet_.top_interval(top.front()).lo, giet_.top_interval(top.back()).hi};
}

std::vector<double> Piet::points() const {
  std::vector<double> out;
  for (Letter a : perm().top) out.push_back(giet_.top_interval(a).lo);
  out.push_back(domain().hi);
  return out;
}

Piet random_piet(const MarkedPermutation& perm, std::mt19937_64& rng,
                 const RandomPietOptions& options) {
  const int m = perm.size();
  auto cuts = [&](const std::vector<Letter>& order) {
    std::vector<double> w(m);
    double total = 0.0;
    for (auto& x : w) total += (x = uniform(rng, options.min_weight, 1.0));
    std::vector<Interval> iv(m);
    double edge = 0.0;
    for (int i = 0; i < m; ++i) {
      const double next = i + 1 == m ? 1.0 : edge + w[i] / total;
      iv[order[i]] = {edge, next};
      edge = next;
    }
    return iv;
  };
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const auto top = cuts(perm.top);
    const auto bottom = cuts(perm.bottom);
    if (options.side) {
      const double lt = top[perm.top.back()].length();
      const double lb = bottom[perm.bottom.back()].length();
      if (std::fabs(lt - lb) < 1e-6) continue;
      if ((lt > lb) != (*options.side == Side::Top)) continue;
    }
    std::vector<BranchFunction> br;
    for (Letter a = 0; a < m; ++a) {
      const double s = 0.5 + options.bend * uniform(rng, -0.5, 0.5);
      const Moebius g = moebius_through({top[a].lo, top[a].at(0.5), top[a].hi},
                                        {bottom[a].lo, bottom[a].at(s), bottom[a].hi});
      br.push_back(BranchFunction::moebius(top[a], g));
    }
    Piet p(Giet(perm, std::move(br)));
    if (options.separated && !separated_fixed_points(p)) continue;
    return p;
  }
  throw Error(ErrorCode::SpecInvalid, "could not draw a PIET with the requested move");
}

Piet conjugate(const Piet& p, const Moebius& g) {
  const Interval dom = p.domain();
  if (!pole_free(g, dom)) throw Error(ErrorCode::PoleAt, "conjugator has a pole on the domain");
  std::vector<double> pts;
  for (double u : p.points()) pts.push_back(g.apply(u));
  std::vector<Moebius> maps;
  const Moebius gi = g.inverse();
  for (const Moebius& f : p.maps()) maps.push_back(g * f * gi);
  return Piet(p.perm(), pts, maps);
}

std::vector<Moebius> puncture_loops(const Piet& p) {
  const GeneratorSystem sys = generator_system(p.perm());
  std::vector<Moebius> out;
  for (const Puncture& pc : sys.punctures) out.push_back(evaluate_word(p.maps(), pc.loop));
  return out;
}

Moebius distinguished_loop(const Piet& p) {
  const GeneratorSystem sys = generator_system(p.perm());
  return evaluate_word(p.maps(), sys.punctures[sys.distinguished].loop);
}

std::vector<double> break_sizes(const Piet& p) {
  const GeneratorSystem sys = generator_system(p.perm());
  const auto pts = p.points();
  std::vector<double> out;
  for (const Puncture& pc : sys.punctures) {
    out.push_back(evaluate_word(p.maps(), pc.loop).derivative(pts[pc.junction]));
  }
  return out;
}

bool separated_fixed_points(const Piet& p) {
  const GeneratorSystem sys = generator_system(p.perm());
  const auto pts = p.points();
  const Interval dom = p.domain();
  for (const Puncture& pc : sys.punctures) {
    const Moebius loop = evaluate_word(p.maps(), pc.loop);
    if (loop.classify() != MoebiusClass::Hyperbolic) return false;
    for (const FixedPoint& fp : loop.fixed_points()) {
      if (is_infinite(fp.x) || std::fabs(fp.x - pts[pc.junction]) <= 1e-9 * dom.length()) continue;
      if (fp.x >= dom.lo && fp.x <= dom.hi) return false;
    }
  }
  return true;
}

double affine_defect(const Moebius& loop) { return std::fabs(loop.c()); }
double affine_defect(const Piet& p) { return affine_defect(distinguished_loop(p)); }

bool is_in_attracting_family(const Piet& p, double tol) {
  const Interval dom = p.domain();
  if (std::fabs(dom.lo) > tol || std::fabs(dom.hi - 1.0) > tol) return false;
  return affine_defect(p) <= tol;
}

Moebius normalising_conjugator(const Piet& p) {
  const Moebius loop = distinguished_loop(p);
  if (loop.classify() != MoebiusClass::Hyperbolic) {
    throw Error(ErrorCode::NonHyperbolicLoop, "distinguished loop is not hyperbolic");
  }
  const Interval dom = p.domain();
  const double a = dom.lo, b = dom.hi;
  // The loop fixes the left end; the other fixed point goes to infinity.
  double q = kInfinity;
  double best = -1.0;
  for (const FixedPoint& fp : loop.fixed_points()) {
    const double dist = is_infinite(fp.x) ? kInfinity : std::fabs(fp.x - a);
    if (dist > best) {
      best = dist;
      q = fp.x;
    }
  }
  if (is_infinite(q)) return Moebius::affine(1.0 / (b - a), -a / (b - a));
  if (q >= a - 1e-12 * (b - a) && q <= b + 1e-12 * (b - a)) {
    throw Error(ErrorCode::NormalisationAmbiguity, "both loop fixed points lie in the domain");
  }
  const double k = (b - q) / (b - a);
  return Moebius(k, -k * a, 1.0, -q);
}

AttractorPoint normalise_into_E(const Piet& p) {
  Piet out = conjugate(p, normalising_conjugator(p));
  AttractorPoint ap;
  ap.sizes = break_sizes(out);
  ap.distinguished_ok = is_in_attracting_family(out);
  ap.piet = std::move(out);
  return ap;
}

double g_lambda_defect(const Piet& p, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::OutOfDomain, "lambda must be positive");
  // Only the loop is needed; the conjugated PIET would live on [0, 1/lambda].
  return affine_defect(distinguished_loop(p).conjugate(Moebius::affine(1.0 / lambda, 0.0)));
}

// ---------------------------------------------------------------------------

Precision precision_from_env() {
  const char* v = std::getenv("RENORM_PRECISION");
  if (v != nullptr && std::string(v) == "extended") return Precision::Extended;
  return Precision::Double;
}

const char* to_string(Precision p) { return p == Precision::Extended ? "extended" : "double"; }

Moebius best_moebius_fit(const BranchFunction& branch) {
  const Interval dom = branch.domain();
  const double mid = dom.at(0.5);
  return moebius_through({dom.lo, mid, dom.hi},
                         {branch.eval(dom.lo), branch.eval(mid), branch.eval(dom.hi)});
}

namespace {

template <class T>
double branch_distance(const BranchFunction& g, int grid) {
  // A single Moebius piece is normalised as a matrix: subtracting nearly equal
  // values of an ill-conditioned map would otherwise show up as distance.
  BranchFunction normalised;
  if (g.is_moebius()) {
    const Interval d = g.domain();
    const Moebius m = g.as_moebius();
    const double y0 = m.apply(d.lo), y1 = m.apply(d.hi);
    normalised = BranchFunction::moebius(
        {0.0, 1.0}, Moebius::affine(1.0 / (y1 - y0), -y0 / (y1 - y0)) * m *
                        Moebius::affine(d.length(), d.lo));
  }
  const BranchFunction& f = g.is_moebius() ? normalised : g;
  const Interval dom = f.domain();
  const T lo = dom.lo;
  const T len = T(dom.hi) - T(dom.lo);
  const T f0 = f.jet<T>(lo).v;
  const T f1 = f.jet<T>(T(dom.hi)).v;
  const T span = f1 - f0;
  // Normalised branch F: [0,1] -> [0,1]; Moebius fit through (0, 1/2, 1).
  const T y = (f.jet<T>(lo + len / T(2)).v - f0) / span;
  if (!(y > T(0) && y < T(1))) {
    throw Error(ErrorCode::DegenerateTriple, "branch values not strictly monotone");
  }
  const T k = (T(1) - y) / y;
  T c0 = 0, c1 = 0;
  for (int i = 0; i < grid; ++i) {
    const T u = T(i) / T(grid - 1);
    const Jet<T> j = f.jet<T>(i == grid - 1 ? T(dom.hi) : lo + u * len);
    const T fv = (j.v - f0) / span;
    const T fd = j.d1 * len / span;
    const T den = u + k * (T(1) - u);
    c0 = std::max<T>(c0, std::fabs(fv - u / den));
    c1 = std::max<T>(c1, std::fabs(fd - k / (den * den)));
  }
  return static_cast<double>(c0 + c1);
}

}  // namespace

double branch_distance_to_P(const BranchFunction& branch, Precision precision, int grid) {
  if (grid < 2) throw Error(ErrorCode::SpecInvalid, "distance grid needs two points");
  return precision == Precision::Extended ? branch_distance<long double>(branch, grid)
                                          : branch_distance<double>(branch, grid);
}

double distance_to_P(const Giet& t, Precision precision, int grid) {
  double d = 0.0;
  for (const BranchFunction& f : t.branches()) {
    d = std::max(d, branch_distance_to_P(f, precision, grid));
  }
  return d;
}

Piet fitted_piet(const Giet& t) {
  std::vector<Moebius> maps;
  for (const BranchFunction& f : t.branches()) maps.push_back(best_moebius_fit(f));
  std::vector<double> points{t.top_interval(t.perm().top.front()).lo};
  for (double u : t.u_top()) points.push_back(u);
  points.push_back(t.top_interval(t.perm().top.back()).hi);
  return Piet(t.perm(), points, maps);
}

double max_log_distortion(const Giet& t, int samples) {
  double out = 0.0;
  for (const BranchFunction& f : t.branches()) {
    const Interval dom = f.domain();
    for (int s = 0; s < samples; ++s) {
      // Quadruples of growing spread centred at staggered points.
      const double w = 0.2 + 0.75 * s / std::max(1, samples - 1);
      const double c = 0.5 + 0.5 * (1.0 - w) * std::sin(1.7 * s);
      const std::array<double, 4> q{dom.at(c - w / 2), dom.at(c - w / 6), dom.at(c + w / 6),
                                    dom.at(c + w / 2)};
      out = std::max(out, std::fabs(std::log(cross_ratio_distortion(f, q))));
    }
  }
  return out;
}

double LineFit::ratio() const { return std::exp(slope); }

LineFit fit_log_line(const std::vector<int>& n, const std::vector<double>& values) {
  LineFit fit;
  const std::size_t k = n.size();
  if (k < 2) return fit;
  double sx = 0, sy = 0;
  std::vector<double> ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    ly[i] = std::log(values[i]);
    sx += n[i];
    sy += ly[i];
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (n[i] - mx) * (n[i] - mx);
    sxy += (n[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t k = a.size();
  if (k < 3) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / k;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / k;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

double unit_roundoff(Precision p) {
  return p == Precision::Extended ? std::numeric_limits<long double>::epsilon()
                                  : std::numeric_limits<double>::epsilon();
}

}  // namespace

ConvergenceStudy convergence_study(const Giet& t, int n_levels, Precision precision,
                                   int window, std::int64_t budget) {
  ConvergenceStudy st;
  const Tower tower = build_tower(t, n_levels, false, budget);
  st.error = tower.error;
  // The floor is found empirically: d1 is evaluated in both precisions and
  // the difference, scaled to the working precision, estimates the noise.
  const double noise_scale = unit_roundoff(precision) / unit_roundoff(Precision::Double);
  for (std::size_t n = 0; n < tower.levels.size(); ++n) {
    const TowerLevel& lv = tower.levels[n];
    ConvergenceRow row;
    row.n = static_cast<int>(n);
    row.x = lv.x;
    try {
      row.delta = dynamical_partition(t, lv, row.n).delta;
      const double d_double = distance_to_P(lv.giet, Precision::Double);
      const double d_ext = distance_to_P(lv.giet, Precision::Extended);
      row.d1 = precision == Precision::Double ? d_double : d_ext;
      row.noise = std::fabs(d_double - d_ext) * noise_scale;
      row.max_log_distortion = max_log_distortion(lv.giet);
      try {
        row.affine_defect = affine_defect(fitted_piet(lv.giet));
      } catch (const Error&) {
        row.affine_defect = std::numeric_limits<double>::quiet_NaN();
      }
    } catch (const Error& e) {
      // This stops the rows before any later tower failure.
      st.error = Error(e.code(), "level " + std::to_string(n) + ": " + e.what(),
                       static_cast<long>(n));
      break;
    }
    row.above_floor = row.noise <= 0.1 * row.d1;
    st.rows.push_back(row);
  }

  std::vector<int> ns;
  std::vector<double> ds;
  for (const auto& r : st.rows) {
    if (r.n >= 2 && r.delta > 1e3 * std::numeric_limits<double>::epsilon()) {
      ns.push_back(r.n);
      ds.push_back(r.delta);
    }
  }
  st.delta_fit = fit_log_line(ns, ds);

  int last = -1;
  for (const auto& r : st.rows) {
    if (!r.above_floor) break;
    last = r.n;
  }
  st.window_last = last;
  st.window_first = std::max(0, last - window + 1);
  ns.clear();
  ds.clear();
  st.monotone_window = last >= 1;
  for (int n = st.window_first; n <= last; ++n) {
    ns.push_back(n);
    ds.push_back(st.rows[n].d1);
    if (n > st.window_first && !(st.rows[n].d1 < st.rows[n - 1].d1)) {
      st.monotone_window = false;
    }
  }
  if (ns.size() >= 2) st.d1_fit = fit_log_line(ns, ds);

  std::vector<double> la, lb;
  for (const auto& r : st.rows) {
    if (r.n >= 1 && r.above_floor && r.delta > 0 && r.max_log_distortion > 0) {
      la.push_back(std::log(r.delta));
      lb.push_back(std::log(r.max_log_distortion));
    }
  }
  st.correlation = pearson(la, lb);
  return st;
}

AttractionStudy attraction_study(const Piet& p, int n_levels, std::int64_t budget) {
  AttractionStudy st;
  const Tower tower = build_tower(p.giet(), n_levels, false, budget);
  st.error = tower.error;
  std::vector<int> ns;
  std::vector<double> ds, xs;
  for (std::size_t n = 0; n < tower.levels.size(); ++n) {
    const TowerLevel& lv = tower.levels[n];
    AttractionRow row{static_cast<int>(n), lv.x, affine_defect(Piet(lv.giet))};
    st.rows.push_back(row);
    if (n >= 1 && row.defect > 1e-14) {
      ns.push_back(row.n);
      ds.push_back(row.defect);
      xs.push_back(row.x);
    }
  }
  st.defect_fit = fit_log_line(ns, ds);
  st.x_fit = fit_log_line(ns, xs);
  return st;
}

// ---------------------------------------------------------------------------

namespace {

using Mat = Eigen::Matrix2d;

Mat raw(const Moebius& m) {
  Mat out;
  out << m.a(), m.b(), m.c(), m.d();
  return out;
}

Mat word_matrix(const std::vector<Mat>& g, const Word& w) {
  Mat acc = Mat::Identity();
  for (int s : w) {
    const Mat& x = g[std::abs(s) - 1];
    if (s > 0) {
      acc = acc * x;
    } else {
      Mat inv;
      inv << x(1, 1), -x(0, 1), -x(1, 0), x(0, 0);
      acc = acc * inv;
    }
  }
  return acc;
}

double apply(const Mat& x, double v) { return (x(0, 0) * v + x(0, 1)) / (x(1, 0) * v + x(1, 1)); }

Eigen::VectorXd constraints(const GeneratorSystem& sys, const std::vector<Mat>& g,
                            const std::vector<double>& traces, bool with_traces) {
  const int d = static_cast<int>(sys.punctures.size());
  Eigen::VectorXd out(3 + (with_traces ? d : 0));
  const Mat loop = word_matrix(g, sys.punctures[sys.distinguished].loop);
  const Letter first = sys.sigma.top.front();
  const Letter last = sys.sigma.top.back();
  out(0) = loop(0, 1) / loop(1, 1);  // loop(0) = 0
  out(1) = loop(1, 0);               // affine
  // Right end: the last top branch ends where the first one starts in the image.
  const double v = apply(g[first], 0.0);
  Mat zi;
  zi << g[last](1, 1), -g[last](0, 1), -g[last](1, 0), g[last](0, 0);
  out(2) = apply(zi, v) - 1.0;
  if (with_traces) {
    for (int j = 0; j < d; ++j) {
      out(3 + j) = std::fabs(word_matrix(g, sys.punctures[j].loop).trace()) - traces[j];
    }
  }
  return out;
}

std::vector<Mat> perturbed(const std::vector<Mat>& g, const Eigen::VectorXd& e) {
  std::vector<Mat> out(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    Mat x;
    x << 1 + e(3 * a), e(3 * a + 1), e(3 * a + 2), 1 - e(3 * a);
    x /= std::sqrt(x.determinant());
    out[a] = g[a] * x;
  }
  return out;
}

}  // namespace

SliceAnalysis slice_analysis(const AttractorPoint& point, const std::vector<double>& c,
                             bool with_traces) {
  const Piet& p = point.piet;
  const GeneratorSystem sys = generator_system(p.perm());
  const int m = p.size();
  const int d = static_cast<int>(sys.punctures.size());
  if (with_traces && static_cast<int>(c.size()) != d) {
    throw Error(ErrorCode::NotOnSlice, "one size per puncture expected");
  }
  std::vector<double> traces;
  if (with_traces) {
    for (double s : c) traces.push_back(trace_from_break_size(s));
  }
  std::vector<Mat> g;
  for (const Moebius& f : p.maps()) g.push_back(raw(f));

  SliceAnalysis out;
  out.ambient = 3 * m;
  out.residual = constraints(sys, g, traces, with_traces).cwiseAbs().maxCoeff();
  if (out.residual > 1e-8) {
    throw Error(ErrorCode::NotOnSlice,
                "constraint residual " + std::to_string(out.residual) + " at the point");
  }
  const double h = 1e-6;
  const int rows = 3 + (with_traces ? d : 0);
  Eigen::MatrixXd jac(rows, out.ambient);
  for (int k = 0; k < out.ambient; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(out.ambient);
    e(k) = h;
    const auto fp = constraints(sys, perturbed(g, e), traces, with_traces);
    const auto fm = constraints(sys, perturbed(g, -e), traces, with_traces);
    jac.col(k) = (fp - fm) / (2 * h);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  const double cut = 1e-8 * (sv.size() > 0 ? sv(0) : 0.0);
  for (int i = 0; i < sv.size(); ++i) {
    out.singular_values.push_back(sv(i));
    if (sv(i) > cut) ++out.rank;
  }
  out.dimension = out.ambient - out.rank;
  return out;
}

int slice_constraint_rank(const AttractorPoint& point, const std::vector<double>& c,
                          bool with_traces) {
  return slice_analysis(point, c, with_traces).dimension;
}

}  // namespace renorm
