#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "renorm/branch.hpp"
#include "renorm/char_variety.hpp"
#include "renorm/circle.hpp"
#include "renorm/giet.hpp"
#include "renorm/moebius.hpp"

// JSON documents for maps, GIETs and representations. Schemas are described
// in docs/schemas.md; every document carries a "schema" tag.
namespace renorm::io {

using Json = nlohmann::json;

inline constexpr const char* kGietSchema = "renorm.giet/1";
inline constexpr const char* kCircleSchema = "renorm.circle/1";
inline constexpr const char* kRepSchema = "renorm.rep/1";
inline constexpr const char* kMapSpecSchema = "renorm.mapspec/1";

Json to_json(const Moebius& m);
Moebius moebius_from_json(const Json& j);

Json to_json(const Piece& p);
Piece piece_from_json(const Json& j);

Json to_json(const BranchFunction& f);
BranchFunction branch_from_json(const Json& j);

Json to_json(const MarkedPermutation& p);
MarkedPermutation permutation_from_json(const Json& j);

Json to_json(const Giet& t);
Giet giet_from_json(const Json& j);

Json to_json(const CircleMap& t);
CircleMap circle_map_from_json(const Json& j);

Json to_json(const Representation& rep);
Representation representation_from_json(const Json& j);

// Map specifications: either an explicit circle map document, or
//   {"type": "rotation", "alpha": a}
//   {"type": "break", "breaks": [...], "sizes": [...],
//    "rotation": target | "beta": shift, "digits": k, "bump": b, "bump_seed": s}
// Issues are reported as "path: message"; an empty list means buildable.
std::vector<std::string> validate_map_spec(const Json& spec, const std::string& path = "map");
CircleMap build_map(const Json& spec);

// Parses a file; throws SpecInvalid on I/O or syntax errors.
Json read_json_file(const std::string& path);
// Writes through a temporary file and renames it into place.
void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace renorm::io
