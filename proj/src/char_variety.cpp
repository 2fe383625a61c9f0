#include "renorm/char_variety.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace renorm {

Word reduce(Word w) {
  Word out;
  out.reserve(w.size());
  for (int s : w) {
    if (s == 0) throw Error(ErrorCode::SpecInvalid, "zero is not a generator");
    if (!out.empty() && out.back() == -s) {
      out.pop_back();
    } else {
      out.push_back(s);
    }
  }
  return out;
}

Word inverse(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (int& s : out) s = -s;
  return out;
}

Word concat(const Word& u, const Word& v) {
  Word w = u;
  w.insert(w.end(), v.begin(), v.end());
  return reduce(std::move(w));
}

Word cyclic_normal_form(const Word& w) {
  Word r = reduce(w);
  std::size_t i = 0, j = r.size();
  while (j - i >= 2 && r[i] == -r[j - 1]) {
    ++i;
    --j;
  }
  Word core(r.begin() + i, r.begin() + j);
  Word best = core;
  for (std::size_t k = 1; k < core.size(); ++k) {
    Word rot(core.begin() + k, core.end());
    rot.insert(rot.end(), core.begin(), core.begin() + k);
    best = std::min(best, rot);
  }
  return best;
}

bool conjugate_up_to_inverse(const Word& u, const Word& v) {
  const Word cv = cyclic_normal_form(v);
  return cyclic_normal_form(u) == cv || cyclic_normal_form(inverse(u)) == cv;
}

Word parse_word(std::string_view text) {
  Word w;
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '*' || ch == '.') {
      ++i;
      continue;
    }
    if (ch == 'e' && w.empty() && text.find_first_not_of(" \te", i) == std::string_view::npos) {
      break;
    }
    if (ch != 'g' && ch != 'G') {
      throw Error(ErrorCode::SpecInvalid, "bad word symbol '" + std::string(1, ch) + "'");
    }
    std::size_t j = i + 1;
    int idx = 0;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
      idx = idx * 10 + (text[j] - '0');
      ++j;
    }
    if (j == i + 1 || idx == 0) throw Error(ErrorCode::SpecInvalid, "generator index expected");
    w.push_back(ch == 'g' ? idx : -idx);
    i = j;
  }
  return reduce(std::move(w));
}

std::string format_word(const Word& w) {
  if (w.empty()) return "e";
  std::string out;
  for (int s : w) {
    if (!out.empty()) out += ' ';
    out += (s > 0 ? 'g' : 'G') + std::to_string(std::abs(s));
  }
  return out;
}

namespace {

// Polygon vertex cycles. Nodes: top vertex T_i is node i (0..m), interior
// bottom vertex B_j is node m + j; B_0 = T_0 and B_m = T_m are the corners.
// Side a glues its top ends to its bottom ends through f_a.
struct Cycle {
  int anchor = 0;            // smallest top node on the cycle
  std::vector<int> nodes;    // visiting order, starting at the anchor
  std::vector<int> applied;  // signed generator moving nodes[k] to nodes[k+1]
};

std::vector<Cycle> vertex_cycles(const MarkedPermutation& sigma) {
  const int m = sigma.size();
  auto bottom_node = [m](int j) { return j == 0 ? 0 : (j == m ? m : m + j); };
  struct End {
    int edge;
    bool top;
  };
  struct Edge {
    Letter letter;
    int t, b;  // node ids of the top and bottom ends
  };
  std::vector<Edge> edges;
  std::vector<std::vector<End>> at(2 * m);
  for (Letter a = 0; a < m; ++a) {
    const int tp = sigma.top_pos(a), bp = sigma.bottom_pos(a);
    for (int side = 0; side < 2; ++side) {
      const Edge e{a, tp + side, bottom_node(bp + side)};
      at[e.t].push_back({static_cast<int>(edges.size()), true});
      at[e.b].push_back({static_cast<int>(edges.size()), false});
      edges.push_back(e);
    }
  }
  std::vector<char> seen(2 * m, 0);
  std::vector<Cycle> out;
  for (int start = 0; start < m; ++start) {
    if (seen[start]) continue;
    Cycle c;
    c.anchor = start;
    // Leave through the left end of the top letter starting at the anchor.
    End cur{2 * sigma.top[start], true};
    int node = start;
    while (true) {
      seen[node] = 1;
      c.nodes.push_back(node);
      const Edge& e = edges[cur.edge];
      const int next = cur.top ? e.b : e.t;
      c.applied.push_back(cur.top ? e.letter + 1 : -(e.letter + 1));
      if (next == start) break;
      // Arrived at the opposite end; continue through the other incidence.
      const End arrived{cur.edge, !cur.top};
      const auto& inc = at[next];
      cur = (inc[0].edge == arrived.edge && inc[0].top == arrived.top) ? inc[1] : inc[0];
      node = next;
      if (c.nodes.size() > static_cast<std::size_t>(2 * m)) {
        throw Error(ErrorCode::NotCircular, "vertex cycle does not close");
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

GeneratorSystem generator_system(const MarkedPermutation& sigma) {
  if (!sigma.valid()) {
    throw Error(ErrorCode::NotCircular, "invalid permutation " + sigma.str());
  }
  const auto cycles = vertex_cycles(sigma);
  // Genus one: m - 1 vertex classes for m sides pairs.
  if (static_cast<int>(cycles.size()) != sigma.size() - 1) {
    throw Error(ErrorCode::NotCircular,
                "permutation " + sigma.str() + " is not in the Rauzy class of a rotation");
  }
  GeneratorSystem sys;
  sys.rank = sigma.size();
  sys.sigma = sigma;
  for (const Cycle& c : cycles) {
    // The loop applies the steps in visiting order; the word is read as a
    // left-to-right matrix product, hence reversed.
    sys.punctures.push_back({reduce(Word(c.applied.rbegin(), c.applied.rend())), c.anchor});
  }
  sys.distinguished = 0;  // the corner class holds the left end
  return sys;
}

Moebius evaluate_word(const std::vector<Moebius>& images, const Word& w) {
  Moebius acc;
  for (int s : w) {
    const int a = std::abs(s) - 1;
    if (a >= static_cast<int>(images.size())) {
      throw Error(ErrorCode::SpecInvalid, "generator outside the representation");
    }
    acc = acc * (s > 0 ? images[a] : images[a].inverse());
  }
  return acc;
}

Moebius evaluate_word(const Representation& rep, const Word& w) {
  return evaluate_word(rep.images, w);
}

std::vector<double> puncture_traces(const Representation& rep) {
  std::vector<double> out;
  for (const Puncture& p : rep.system.punctures) out.push_back(evaluate_word(rep, p.loop).trace());
  return out;
}

Representation psi(const Piet& p) { return {generator_system(p.perm()), p.maps()}; }

namespace {

std::vector<double> finite_fixed_points(const Moebius& m) {
  if (m.is_identity() || m.classify() == MoebiusClass::Elliptic) {
    throw Error(ErrorCode::NoRealFixedPoint, "loop image has no isolated real fixed point");
  }
  std::vector<double> out;
  for (const FixedPoint& fp : m.fixed_points()) {
    if (!is_infinite(fp.x)) out.push_back(fp.x);
  }
  return out;
}

}  // namespace

Piet psi_inverse(const Representation& rep) {
  const MarkedPermutation& sigma = rep.system.sigma;
  const int m = sigma.size();
  if (static_cast<int>(rep.images.size()) != m) {
    throw Error(ErrorCode::SpecInvalid, "one image per generator expected");
  }
  const auto cycles = vertex_cycles(sigma);
  std::vector<std::vector<double>> cands(cycles.size());
  for (std::size_t j = 0; j < cycles.size(); ++j) {
    const Cycle& c = cycles[j];
    cands[j] = finite_fixed_points(
        evaluate_word(rep, Word(c.applied.rbegin(), c.applied.rend())));
    if (cands[j].empty()) {
      throw Error(ErrorCode::NoRealFixedPoint, "loop image fixes only infinity");
    }
  }
  std::vector<Moebius> step(2 * m + 1);
  for (Letter a = 0; a < m; ++a) {
    step[m + a + 1] = rep.images[a];
    step[m - a - 1] = rep.images[a].inverse();
  }

  // Enumerate fixed-point choices; prefer the assignment whose unused fixed
  // points stay out of the recovered domain.
  std::optional<Piet> best;
  int best_score = 1 << 30;
  std::vector<std::size_t> pick(cycles.size(), 0);
  std::vector<double> pos(2 * m, 0.0);
  while (true) {
    for (std::size_t j = 0; j < cycles.size(); ++j) {
      const Cycle& c = cycles[j];
      pos[c.anchor] = cands[j][pick[j]];
      for (std::size_t k = 0; k + 1 < c.nodes.size(); ++k) {
        pos[c.nodes[k + 1]] = step[m + c.applied[k]].apply(pos[c.nodes[k]]);
      }
    }
    const std::vector<double> u(pos.begin(), pos.begin() + m + 1);
    if (std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); })) {
      try {
        Piet p(sigma, u, rep.images);
        int score = 0;
        for (std::size_t j = 0; j < cands.size(); ++j) {
          for (std::size_t k = 0; k < cands[j].size(); ++k) {
            if (k != pick[j] && cands[j][k] >= u[0] && cands[j][k] <= u[m]) ++score;
          }
        }
        if (score < best_score) {
          best_score = score;
          best = std::move(p);
        }
      } catch (const Error&) {
      }
    }
    std::size_t j = 0;
    while (j < pick.size() && ++pick[j] == cands[j].size()) pick[j++] = 0;
    if (j == pick.size()) break;
  }
  if (!best) {
    throw Error(ErrorCode::OrderViolation, "no fixed-point choice yields ordered intervals");
  }
  return *best;
}

double entrywise_distance(const std::vector<Moebius>& a, const std::vector<Moebius>& b) {
  if (a.size() != b.size()) return kInfinity;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double plus = 0.0, minus = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double x = a[i].entries()[k], y = b[i].entries()[k];
      const double scale = std::max(1.0, std::fabs(y));
      plus = std::max(plus, std::fabs(x - y) / scale);
      minus = std::max(minus, std::fabs(x + y) / scale);
    }
    d = std::max(d, std::min(plus, minus));
  }
  return d;
}

double representation_distance(const Representation& a, const Representation& b) {
  auto normal = [](const Representation& r) {
    try {
      const Piet p = psi_inverse(r);
      const Moebius g = normalising_conjugator(p);
      std::vector<Moebius> out;
      for (const Moebius& f : r.images) out.push_back(g * f * g.inverse());
      return out;
    } catch (const Error&) {
      return r.images;
    }
  };
  return entrywise_distance(normal(a), normal(b));
}

FreeGroupSubstitution FreeGroupSubstitution::identity(int rank) {
  FreeGroupSubstitution s;
  for (int a = 0; a < rank; ++a) {
    s.images.push_back({a + 1});
    s.inverse_images.push_back({a + 1});
  }
  return s;
}

Word FreeGroupSubstitution::apply(const Word& w) const {
  Word out;
  for (int s : w) {
    const Word& img = images.at(std::abs(s) - 1);
    const Word piece = s > 0 ? img : renorm::inverse(img);
    out.insert(out.end(), piece.begin(), piece.end());
  }
  return reduce(std::move(out));
}

FreeGroupSubstitution FreeGroupSubstitution::inverse() const {
  FreeGroupSubstitution s;
  s.images = inverse_images;
  s.inverse_images = images;
  return s;
}

FreeGroupSubstitution compose(const FreeGroupSubstitution& outer,
                              const FreeGroupSubstitution& inner) {
  FreeGroupSubstitution s;
  for (const Word& w : inner.images) s.images.push_back(outer.apply(w));
  // (outer o inner)^{-1} = inner^{-1} o outer^{-1}
  const FreeGroupSubstitution ii = inner.inverse();
  for (const Word& w : outer.inverse_images) s.inverse_images.push_back(ii.apply(w));
  return s;
}

FreeGroupSubstitution rauzy_substitution(const MarkedPermutation& pi, const RauzyMove& move) {
  MarkedPermutation next;
  RauzyMove actual;
  if (!rauzy_move(pi, move.side, next, &actual) || !(actual == move)) {
    throw Error(ErrorCode::InadmissibleMove, "move not admissible at " + pi.str());
  }
  FreeGroupSubstitution s = FreeGroupSubstitution::identity(pi.size());
  const int w = move.winner + 1, l = move.loser + 1;
  if (move.side == Side::Top) {
    s.images[move.loser] = {w, l};
    s.inverse_images[move.loser] = {-w, l};
  } else {
    s.images[move.loser] = {l, w};
    s.inverse_images[move.loser] = {l, -w};
  }
  return s;
}

FreeGroupSubstitution rauzy_substitution(const MarkedPermutation& pi, Side side) {
  MarkedPermutation next;
  RauzyMove mv;
  if (!rauzy_move(pi, side, next, &mv)) {
    throw Error(ErrorCode::InadmissibleMove, "no arrow from " + pi.str());
  }
  return rauzy_substitution(pi, mv);
}

FreeGroupSubstitution path_substitution(const RauzyPath& path) {
  FreeGroupSubstitution acc = FreeGroupSubstitution::identity(path.start.size());
  MarkedPermutation pi = path.start;
  for (const RauzyMove& mv : path.moves) {
    acc = compose(acc, rauzy_substitution(pi, mv));
    MarkedPermutation next;
    rauzy_move(pi, mv.side, next);
    pi = next;
  }
  return acc;
}

MarkedPermutation path_end(const RauzyPath& path) {
  MarkedPermutation pi = path.start;
  for (const RauzyMove& mv : path.moves) {
    MarkedPermutation next;
    if (!rauzy_move(pi, mv.side, next)) {
      throw Error(ErrorCode::InadmissibleMove, "path leaves the diagram");
    }
    pi = next;
  }
  return pi;
}

Representation precompose(const Representation& rep, const FreeGroupSubstitution& sub,
                          const MarkedPermutation& target) {
  Representation out;
  out.system = generator_system(target);
  for (const Word& w : sub.images) out.images.push_back(evaluate_word(rep, w));
  return out;
}

Representation precompose(const Representation& rep, const FreeGroupSubstitution& sub) {
  return precompose(rep, sub, rep.system.sigma);
}

double functoriality_residual(const Piet& p) {
  const StepResult r = elementary_rauzy_step(p.giet());
  const Piet next(r.giet);
  const FreeGroupSubstitution sub = rauzy_substitution(p.perm(), r.move);
  const Moebius g = Moebius::affine(1.0 / r.scale, 0.0);
  const Moebius gi = g.inverse();
  std::vector<Moebius> want;
  for (const Word& w : sub.images) want.push_back(g * evaluate_word(p.maps(), w) * gi);
  return entrywise_distance(next.maps(), want);
}

InvarianceReport mcg_invariance_probe(const Representation& rep, const RauzyPath& path,
                                      const std::vector<std::string>& words) {
  InvarianceReport out;
  const FreeGroupSubstitution phi = path_substitution(path);
  // Traces of rho o phi are read on the cyclically reduced substituted word:
  // exact conjugation invariance, and no cancellation between long factors.
  auto trace_after = [&](const Word& w) {
    return evaluate_word(rep, cyclic_normal_form(phi.apply(w))).trace();
  };
  for (const std::string& text : words) {
    const Word w = parse_word(text);
    ProbeEntry e{text, evaluate_word(rep, w).trace(), trace_after(w)};
    out.word_drift = std::max(out.word_drift, std::fabs(e.after - e.before));
    out.entries.push_back(std::move(e));
  }
  out.puncture_before = puncture_traces(rep);
  for (const Puncture& pc : generator_system(path_end(path)).punctures) {
    out.puncture_after.push_back(trace_after(pc.loop));
  }
  std::sort(out.puncture_before.begin(), out.puncture_before.end());
  std::sort(out.puncture_after.begin(), out.puncture_after.end());
  for (std::size_t i = 0; i < out.puncture_before.size() && i < out.puncture_after.size(); ++i) {
    out.puncture_drift = std::max(
        out.puncture_drift, std::fabs(out.puncture_before[i] - out.puncture_after[i]) /
                                std::max(1.0, out.puncture_before[i]));
  }
  return out;
}

}  // namespace renorm
