#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "renorm/giet.hpp"
#include "renorm/moebius.hpp"
#include "renorm/piet.hpp"

namespace renorm {

// Words in the free group on gamma_1..gamma_m: entry a+1 stands for gamma_a,
// -(a+1) for its inverse. Stored freely reduced.
using Word = std::vector<int>;

Word reduce(Word w);
Word inverse(const Word& w);
Word concat(const Word& u, const Word& v);
// Cyclic reduction followed by the lexicographically least rotation.
Word cyclic_normal_form(const Word& w);
// Same conjugacy class up to inversion.
bool conjugate_up_to_inverse(const Word& u, const Word& v);

// "g1 G2 g3" or "g1G2g3"; capitals are inverses; "e" or "" is the identity.
Word parse_word(std::string_view text);
std::string format_word(const Word& w);

struct Puncture {
  Word loop;
  int junction = 0;  // top junction u_i fixed by the loop (0: left end)
};

struct GeneratorSystem {
  int rank = 0;
  MarkedPermutation sigma;
  std::vector<Puncture> punctures;  // d = rank - 1 of them
  int distinguished = 0;
};

GeneratorSystem generator_system(const MarkedPermutation& sigma);

struct Representation {
  GeneratorSystem system;
  std::vector<Moebius> images;  // by letter
};

Moebius evaluate_word(const std::vector<Moebius>& images, const Word& w);
Moebius evaluate_word(const Representation& rep, const Word& w);
std::vector<double> puncture_traces(const Representation& rep);

Representation psi(const Piet& p);
Piet psi_inverse(const Representation& rep);

// Distance between representations after removing the global conjugation:
// both are moved to normal form by the distinguished-loop normaliser when
// possible, then compared entrywise.
double representation_distance(const Representation& a, const Representation& b);
double entrywise_distance(const std::vector<Moebius>& a, const std::vector<Moebius>& b);

struct FreeGroupSubstitution {
  std::vector<Word> images;          // gamma_a -> images[a]
  std::vector<Word> inverse_images;  // images of the inverse substitution

  static FreeGroupSubstitution identity(int rank);
  int rank() const { return static_cast<int>(images.size()); }
  Word apply(const Word& w) const;
  FreeGroupSubstitution inverse() const;
};

// outer o inner: gamma -> outer(inner(gamma)).
FreeGroupSubstitution compose(const FreeGroupSubstitution& outer,
                              const FreeGroupSubstitution& inner);

FreeGroupSubstitution rauzy_substitution(const MarkedPermutation& pi, const RauzyMove& move);
FreeGroupSubstitution rauzy_substitution(const MarkedPermutation& pi, Side side);
// Substitution of a whole path: rho o phi_1 o ... o phi_n.
FreeGroupSubstitution path_substitution(const RauzyPath& path);
MarkedPermutation path_end(const RauzyPath& path);

// images[a] := evaluate_word(rep, sub(gamma_a)); the system is taken from
// `target` (the permutation reached by the moves).
Representation precompose(const Representation& rep, const FreeGroupSubstitution& sub,
                          const MarkedPermutation& target);
Representation precompose(const Representation& rep, const FreeGroupSubstitution& sub);

// psi(E(p)) against g (psi(p) o phi) g^{-1}, with g the rescaling of the step.
double functoriality_residual(const Piet& p);

struct ProbeEntry {
  std::string word;
  double before = 0.0;
  double after = 0.0;
};

struct InvarianceReport {
  std::vector<ProbeEntry> entries;  // requested words, traces before/after
  std::vector<double> puncture_before;  // sorted
  std::vector<double> puncture_after;   // sorted
  double puncture_drift = 0.0;
  double word_drift = 0.0;
};

// rho' = rho o phi for the path substitution phi. Requested words are traced
// under rho and rho' (data only); puncture traces are read in the start and
// end systems and compared as sorted multisets.
InvarianceReport mcg_invariance_probe(const Representation& rep, const RauzyPath& path,
                                      const std::vector<std::string>& words);

}  // namespace renorm
