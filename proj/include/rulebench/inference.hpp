#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rulebench/core.hpp"

namespace rulebench {

// One forward-chaining application of a rule to ground premises.
// inferred_probability is the rule probability times the chain probabilities
// of the premises (exact on simple networks).
struct ProofStep {
  std::size_t rule_index = 0;
  std::vector<GroundAtom> premises;
  GroundAtom conclusion;
  double rule_probability = 1.0;
  double inferred_probability = 1.0;

  bool operator==(const ProofStep&) const = default;
};

enum class NetworkKind { Simple, Complex };

std::string to_string(NetworkKind kind);
NetworkKind network_kind_from_string(std::string_view s);

// Everything known about one atom of the closure. `steps` holds every
// distinct rule application that derives the atom; given facts have depth 0
// and keep their stated probability even when rules re-derive them.
struct DerivedFact {
  double probability = 1.0;
  int depth = 0;
  std::vector<ProofStep> steps;
  int chosen_step = -1;  // index into steps along a minimal-depth derivation
};

class Closure {
 public:
  std::map<GroundAtom, DerivedFact> derived;

  bool contains(const GroundAtom& atom) const { return derived.count(atom) > 0; }
  const DerivedFact* find(const GroundAtom& atom) const;
  std::optional<int> depth_of(const GroundAtom& atom) const;
};

// Fixed point of rule application over all ground instantiations. Rule
// probabilities do not gate derivability here; they only weight worlds in
// infer_exact.
Closure derive_closure(const Theory& t);

// Complex iff some fact in the hypothesis's derivation cone has two or more
// distinct deriving rule applications.
NetworkKind classify(const Closure& closure, const Hypothesis& h);
NetworkKind classify(const Theory& t, const Hypothesis& h);

// Facts participating in any derivation of h (h included), ordered by
// (depth, atom).
std::vector<GroundAtom> derivation_cone(const Closure& closure, const Hypothesis& h);

// Steps of a minimal-depth derivation of h, premises before conclusions.
// Empty for given or underivable hypotheses.
std::vector<ProofStep> minimal_proof_chain(const Closure& closure, const Hypothesis& h);

struct SimpleInference {
  double probability = 0.0;
  std::vector<ProofStep> chain;
};

// Product of the rule probabilities along the unique derivation (each rule
// counted once) and of the given leaf facts. Underivable hypotheses get 0.0
// with an empty chain (closed world). Throws std::invalid_argument on
// Complex instances.
SimpleInference infer_simple(const Theory& t, const Hypothesis& h);

inline constexpr int kDefaultWorldCap = 24;

// Exact probability by enumeration of rule-outcome worlds: each rule is one
// independent Bernoulli switch shared by all its ground instantiations, and
// h's probability is the total weight of worlds whose active rules derive it.
// Facts with probability strictly inside (0,1) are enumerated as switches as
// well; certain rules and facts do not consume enumeration budget. Refuses
// theories whose switch count exceeds max_switches.
double infer_exact(const Theory& t, const Hypothesis& h, int max_switches = kDefaultWorldCap);

// Minimal derivation depth; nullopt when h is underivable.
std::optional<int> depth(const Theory& t, const Hypothesis& h);

}  // namespace rulebench
