#include "renorm/serialize.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "renorm/error.hpp"

namespace renorm::io {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::SpecInvalid, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) invalid(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) invalid(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

void check_schema(const Json& j, const char* schema) {
  if (j.contains("schema") && j.at("schema") != schema) {
    invalid("expected schema " + std::string(schema) + ", got " + j.at("schema").dump());
  }
}

std::vector<double> numbers(const Json& j) {
  if (!j.is_array()) invalid("expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) invalid("expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

Json to_json(const Moebius& m) { return Json::array({m.a(), m.b(), m.c(), m.d()}); }

Moebius moebius_from_json(const Json& j) {
  const auto v = numbers(j);
  if (v.size() != 4) invalid("a Moebius map has four entries");
  try {
    return Moebius(v[0], v[1], v[2], v[3]);
  } catch (const Error& e) {
    invalid(e.what());
  }
}

Json to_json(const Piece& p) {
  if (const auto* af = std::get_if<AffinePiece>(&p)) {
    return {{"type", "affine"}, {"lambda", af->lambda}, {"t", af->t}};
  }
  if (const auto* mp = std::get_if<MoebiusPiece>(&p)) {
    return {{"type", "moebius"}, {"m", to_json(mp->m)}};
  }
  const auto& pp = std::get<PerturbPiece>(p);
  return {{"type", "perturb"}, {"amplitude", pp.amplitude}, {"shape", pp.shape},
          {"lo", pp.lo},       {"hi", pp.hi},               {"inverted", pp.inverted}};
}

Piece piece_from_json(const Json& j) {
  const std::string type = field(j, "type").get<std::string>();
  if (type == "affine") return AffinePiece{number(j, "lambda"), number(j, "t")};
  if (type == "moebius") return MoebiusPiece{moebius_from_json(field(j, "m"))};
  if (type == "perturb") {
    PerturbPiece pp;
    pp.amplitude = number(j, "amplitude");
    pp.shape = field(j, "shape").get<int>();
    pp.lo = number(j, "lo");
    pp.hi = number(j, "hi");
    pp.inverted = j.value("inverted", false);
    return pp;
  }
  invalid("unknown piece type '" + type + "'");
}

Json to_json(const BranchFunction& f) {
  Json segs = Json::array();
  for (const auto& s : f.segments()) {
    Json chain = Json::array();
    for (const auto& p : s.chain.pieces()) chain.push_back(to_json(p));
    segs.push_back({{"domain", {s.domain.lo, s.domain.hi}}, {"chain", chain}});
  }
  return {{"segments", segs}};
}

BranchFunction branch_from_json(const Json& j) {
  std::vector<Segment> segs;
  for (const auto& s : field(j, "segments")) {
    const auto d = numbers(field(s, "domain"));
    if (d.size() != 2) invalid("a domain has two end points");
    std::vector<Piece> pieces;
    for (const auto& p : field(s, "chain")) pieces.push_back(piece_from_json(p));
    segs.push_back({{d[0], d[1]}, Chain(std::move(pieces))});
  }
  try {
    return BranchFunction(std::move(segs));
  } catch (const Error& e) {
    invalid(e.what());
  }
}

Json to_json(const MarkedPermutation& p) { return {{"top", p.top}, {"bottom", p.bottom}}; }

MarkedPermutation permutation_from_json(const Json& j) {
  MarkedPermutation p;
  p.top = field(j, "top").get<std::vector<Letter>>();
  p.bottom = field(j, "bottom").get<std::vector<Letter>>();
  if (!p.valid()) invalid("invalid marked permutation");
  return p;
}

Json to_json(const Giet& t) {
  Json br = Json::array();
  for (const auto& b : t.branches()) br.push_back(to_json(b));
  return {{"schema", kGietSchema},
          {"permutation", to_json(t.perm())},
          {"singularities", t.u_top()},
          {"branches", br}};
}

Giet giet_from_json(const Json& j) {
  check_schema(j, kGietSchema);
  std::vector<BranchFunction> br;
  for (const auto& b : field(j, "branches")) br.push_back(branch_from_json(b));
  try {
    return Giet(permutation_from_json(field(j, "permutation")), std::move(br));
  } catch (const Error& e) {
    invalid(e.what());
  }
}

Json to_json(const CircleMap& t) {
  Json arcs = Json::array();
  for (const auto& a : t.arcs()) arcs.push_back(to_json(a));
  return {{"schema", kCircleSchema}, {"breaks", t.breaks()}, {"sizes", t.sizes()}, {"arcs", arcs}};
}

CircleMap circle_map_from_json(const Json& j) {
  check_schema(j, kCircleSchema);
  std::vector<BranchFunction> arcs;
  for (const auto& a : field(j, "arcs")) arcs.push_back(branch_from_json(a));
  const auto breaks = numbers(field(j, "breaks"));
  try {
    return CircleMap(breaks, std::move(arcs), !breaks.empty());
  } catch (const Error& e) {
    invalid(e.what());
  }
}

Json to_json(const Representation& rep) {
  Json punctures = Json::array();
  for (const auto& p : rep.system.punctures) {
    punctures.push_back({{"word", format_word(p.loop)}, {"junction", p.junction}});
  }
  Json images = Json::array();
  for (const auto& m : rep.images) images.push_back(to_json(m));
  return {{"schema", kRepSchema},
          {"rank", rep.system.rank},
          {"sigma", to_json(rep.system.sigma)},
          {"punctures", punctures},
          {"distinguished", rep.system.distinguished},
          {"images", images}};
}

Representation representation_from_json(const Json& j) {
  check_schema(j, kRepSchema);
  Representation rep;
  try {
    rep.system = generator_system(permutation_from_json(field(j, "sigma")));
  } catch (const Error& e) {
    invalid(e.what());
  }
  for (const auto& m : field(j, "images")) rep.images.push_back(moebius_from_json(m));
  if (static_cast<int>(rep.images.size()) != rep.system.rank) {
    invalid("one image per generator expected");
  }
  // Stored words are informational; they must agree with the permutation.
  if (j.contains("punctures")) {
    const auto& ps = j.at("punctures");
    if (ps.size() != rep.system.punctures.size()) invalid("puncture count mismatch");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (parse_word(field(ps[i], "word").get<std::string>()) != rep.system.punctures[i].loop) {
        invalid("puncture word " + std::to_string(i) + " does not match the permutation");
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<std::string> validate_map_spec(const Json& spec, const std::string& path) {
  std::vector<std::string> issues;
  auto issue = [&](const std::string& where, const std::string& msg) {
    issues.push_back(path + (where.empty() ? "" : "." + where) + ": " + msg);
  };
  if (!spec.is_object()) {
    issue("", "must be an object");
    return issues;
  }
  if (spec.contains("schema") && spec.at("schema") == kCircleSchema) {
    try {
      (void)circle_map_from_json(spec);
    } catch (const Error& e) {
      issue("", e.what());
    }
    return issues;
  }
  if (!spec.contains("type") || !spec.at("type").is_string()) {
    issue("type", "missing map type (rotation | break)");
    return issues;
  }
  const std::string type = spec.at("type").get<std::string>();
  auto in_unit = [&](const char* key, bool required) {
    if (!spec.contains(key)) {
      if (required) issue(key, "missing");
      return;
    }
    const Json& v = spec.at(key);
    if (!v.is_number()) {
      issue(key, "must be a number");
    } else if (!(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
      issue(key, "must lie in (0,1)");
    }
  };
  if (type == "rotation") {
    in_unit("alpha", true);
    return issues;
  }
  if (type != "break") {
    issue("type", "unknown map type '" + type + "'");
    return issues;
  }
  std::vector<double> breaks, sizes;
  try {
    breaks = numbers(spec.value("breaks", Json()));
  } catch (const Error&) {
    issue("breaks", "must be an array of numbers");
  }
  try {
    sizes = numbers(spec.value("sizes", Json()));
  } catch (const Error&) {
    issue("sizes", "must be an array of numbers");
  }
  if (breaks.empty()) issue("breaks", "at least one break point is required");
  if (breaks.size() != sizes.size()) issue("sizes", "one size per break point");
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    if (!(breaks[i] >= 0.0 && breaks[i] < 1.0)) issue("breaks", "break points must lie in [0,1)");
    if (i > 0 && !(breaks[i] > breaks[i - 1])) issue("breaks", "break points must increase");
  }
  for (double c : sizes) {
    if (c == 1.0) {
      issue("sizes", "break size equals 1");
    } else if (!(c > 0.0) || !std::isfinite(c)) {
      issue("sizes", "break sizes must be positive");
    }
  }
  const bool has_rot = spec.contains("rotation"), has_beta = spec.contains("beta");
  if (has_rot == has_beta) issue("rotation", "give exactly one of 'rotation' and 'beta'");
  if (has_rot) in_unit("rotation", true);
  if (has_beta && !spec.at("beta").is_number()) issue("beta", "must be a number");
  if (spec.contains("digits") &&
      !(spec.at("digits").is_number_integer() && spec.at("digits").get<int>() >= 1)) {
    issue("digits", "must be a positive integer");
  }
  if (spec.contains("bump")) {
    const Json& b = spec.at("bump");
    if (!b.is_number() || !(b.get<double>() >= 0.0 && b.get<double>() < 1.0)) {
      issue("bump", "must lie in [0,1)");
    }
    if (b.is_number() && b.get<double>() > 0.0 && !spec.contains("bump_seed")) {
      issue("bump_seed", "a seed is required for perturbed maps");
    }
  }
  return issues;
}

CircleMap build_map(const Json& spec) {
  const auto issues = validate_map_spec(spec);
  if (!issues.empty()) invalid(issues.front());
  if (spec.contains("schema")) return circle_map_from_json(spec);
  if (spec.at("type") == "rotation") return CircleMap::rotation(spec.at("alpha").get<double>());
  const auto breaks = numbers(spec.at("breaks"));
  const auto sizes = numbers(spec.at("sizes"));
  BreakMapOptions o;
  o.bump = spec.value("bump", 0.0);
  o.seed = spec.value("bump_seed", std::uint64_t{0});
  if (spec.contains("beta")) return make_break_map(breaks, sizes, spec.at("beta").get<double>(), o);
  return make_break_map_with_rotation(breaks, sizes, spec.at("rotation").get<double>(), o,
                                      spec.value("digits", 30));
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    invalid(path + ": " + e.what());
  }
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) invalid("cannot write " + tmp.string());
    out << text;
    if (!out) invalid("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace renorm::io
