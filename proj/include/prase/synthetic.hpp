#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "prase/errors.hpp"
#include "prase/kg.hpp"
#include "prase/openea.hpp"

namespace prase {

// Controls for deriving a perturbed copy of a graph. Generation is fully
// determined by rename_seed.
struct PerturbationSpec {
  double triple_drop_rate = 0.0;     // relation triples removed
  double attribute_drop_rate = 0.0;  // attribute triples removed
  double literal_corruption_rate = 0.0;  // surviving literals replaced
  std::uint64_t rename_seed = 0;
};

namespace detail {
inline std::string renamed(const std::string& label) { return label + "_2"; }
}  // namespace detail

// Copies kg into a second graph with every entity/relation/attribute label
// renamed, the requested fractions of triples dropped, and the requested
// fraction of surviving literal values replaced by fresh random tokens.
// Gold is the identity correspondence on the entities that survive.
inline DatasetPair synthesize_pair(const KnowledgeGraph& kg, const PerturbationSpec& spec) {
  for (double rate :
       {spec.triple_drop_rate, spec.attribute_drop_rate, spec.literal_corruption_rate}) {
    if (!(rate >= 0.0 && rate <= 1.0))
      throw ConfigError("perturbation rates must lie in [0,1]");
  }
  std::mt19937_64 rng(spec.rename_seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  KgBuilder b;
  for (const Triple& t : kg.triples()) {
    bool attr = kg.is_attribute(t.rel);
    double drop = attr ? spec.attribute_drop_rate : spec.triple_drop_rate;
    bool keep = !(coin(rng) < drop);
    // Corruption draws happen for every attribute triple so that the drop
    // rate does not shift which triples get corrupted.
    bool corrupt = attr && coin(rng) < spec.literal_corruption_rate;
    std::uint64_t token = corrupt ? rng() : 0;
    if (!keep) continue;

    ElementId h = b.intern_element(detail::renamed(kg.label(t.head)), false);
    ElementId r = b.intern_predicate(detail::renamed(kg.predicate_label(t.rel)), attr);
    ElementId tail;
    if (attr) {
      std::string value =
          corrupt ? "corrupted_" + std::to_string(token) : kg.label(t.tail);
      tail = b.intern_element(value, true);
    } else {
      tail = b.intern_element(detail::renamed(kg.label(t.tail)), false);
    }
    b.add_triple(h, r, tail);
  }

  DatasetPair pair;
  pair.kg1 = kg;
  pair.kg2 = b.freeze();
  for (ElementId e = 0; e < kg.element_count(); ++e) {
    if (kg.is_value(e)) continue;
    if (pair.kg2.find_entity(detail::renamed(kg.label(e))) != kNoElement)
      pair.gold.emplace_back(kg.label(e), detail::renamed(kg.label(e)));
  }
  return pair;
}

// Parameters of the random benchmark graph: a relation layer of fixed
// out-degree over uniformly drawn targets, plus per-entity attribute
// triples whose literal values are unique to the entity.
struct RandomKgSpec {
  int entities = 1000;
  int relations = 20;
  int attributes = 5;
  int relation_out_degree = 3;
  int attrs_per_entity = 2;
  std::uint64_t seed = 1;
};

inline KnowledgeGraph make_random_kg(const RandomKgSpec& spec) {
  if (spec.entities < 2 || spec.relations < 1 || spec.attributes < 1 ||
      spec.relation_out_degree < 1 || spec.attrs_per_entity < 0)
    throw ConfigError("random graph spec out of range");
  std::mt19937_64 rng(spec.seed);
  KgBuilder b;
  std::vector<ElementId> entities(spec.entities);
  for (int i = 0; i < spec.entities; ++i)
    entities[i] = b.intern_element("ent:e" + std::to_string(i), false);
  std::vector<ElementId> relations(spec.relations);
  for (int j = 0; j < spec.relations; ++j)
    relations[j] = b.intern_predicate("rel:r" + std::to_string(j), false);
  std::vector<ElementId> attributes(spec.attributes);
  for (int j = 0; j < spec.attributes; ++j)
    attributes[j] = b.intern_predicate("attr:a" + std::to_string(j), true);

  for (int i = 0; i < spec.entities; ++i) {
    for (int d = 0; d < spec.relation_out_degree; ++d) {
      auto target = static_cast<int>(rng() % spec.entities);
      if (target == i) target = (target + 1) % spec.entities;
      auto rel = static_cast<int>(rng() % spec.relations);
      b.add_triple(entities[i], relations[rel], entities[target]);
    }
    for (int s = 0; s < spec.attrs_per_entity; ++s) {
      ElementId v =
          b.intern_element("v" + std::to_string(i) + "_" + std::to_string(s), true);
      b.add_triple(entities[i], attributes[s % spec.attributes], v);
    }
  }
  return b.freeze();
}

}  // namespace prase
