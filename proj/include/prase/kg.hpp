#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prase/errors.hpp"
#include "prase/text.hpp"

namespace prase {

using ElementId = std::uint32_t;
inline constexpr ElementId kNoElement = std::numeric_limits<ElementId>::max();

// Ids are dense per graph and per namespace: one namespace for entities and
// literal values, one for relations and attributes.
struct Triple {
  ElementId head;
  ElementId rel;
  ElementId tail;
  friend bool operator==(const Triple&, const Triple&) = default;
};

class KnowledgeGraph;

class KgBuilder {
 public:
  // Entities and values share one id space; the literal flag is part of the
  // identity, so an IRI and a literal with equal text stay distinct elements.
  // Literal labels are stored in normalized form.
  ElementId intern_element(std::string_view label, bool is_literal) {
    require_open();
    if (is_literal) {
      std::string norm = normalize_literal(label);
      auto it = value_ids_.find(norm);
      if (it != value_ids_.end()) return it->second;
      ElementId id = static_cast<ElementId>(element_labels_.size());
      value_ids_.emplace(norm, id);
      element_labels_.push_back(std::move(norm));
      element_is_value_.push_back(1);
      return id;
    }
    std::string norm(trim(label));
    auto it = entity_ids_.find(norm);
    if (it != entity_ids_.end()) return it->second;
    ElementId id = static_cast<ElementId>(element_labels_.size());
    entity_ids_.emplace(norm, id);
    element_labels_.push_back(std::move(norm));
    element_is_value_.push_back(0);
    return id;
  }

  ElementId intern_predicate(std::string_view label, bool is_attribute) {
    require_open();
    std::string norm(trim(label));
    auto& ids = is_attribute ? attribute_ids_ : relation_ids_;
    auto it = ids.find(norm);
    if (it != ids.end()) return it->second;
    ElementId id = static_cast<ElementId>(predicate_labels_.size());
    ids.emplace(norm, id);
    predicate_labels_.push_back(std::move(norm));
    predicate_is_attribute_.push_back(is_attribute ? 1 : 0);
    return id;
  }

  void add_triple(ElementId head, ElementId rel, ElementId tail) {
    require_open();
    if (head >= element_labels_.size() || tail >= element_labels_.size() ||
        rel >= predicate_labels_.size())
      throw UsageError("add_triple: id out of range");
    if (element_is_value_[head])
      throw UsageError("add_triple: head must be an entity, not a literal value");
    bool attr = predicate_is_attribute_[rel] != 0;
    bool tail_value = element_is_value_[tail] != 0;
    if (attr != tail_value)
      throw UsageError(attr ? "add_triple: attribute triple requires a literal tail"
                            : "add_triple: relation triple requires an entity tail");
    triples_.push_back({head, rel, tail});
  }

  KnowledgeGraph freeze();

 private:
  void require_open() const {
    if (frozen_) throw UsageError("builder already frozen");
  }

  friend class KnowledgeGraph;
  bool frozen_ = false;
  std::vector<std::string> element_labels_;
  std::vector<char> element_is_value_;
  std::vector<std::string> predicate_labels_;
  std::vector<char> predicate_is_attribute_;
  std::vector<Triple> triples_;
  std::unordered_map<std::string, ElementId> entity_ids_;
  std::unordered_map<std::string, ElementId> value_ids_;  // normalized text -> id
  std::unordered_map<std::string, ElementId> relation_ids_;
  std::unordered_map<std::string, ElementId> attribute_ids_;
};

// Frozen, immutable graph with head/tail indexes. Safe for concurrent reads.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  std::size_t element_count() const { return element_labels_.size(); }
  std::size_t predicate_count() const { return predicate_labels_.size(); }
  std::size_t entity_count() const { return entity_count_; }
  std::size_t value_count() const { return element_labels_.size() - entity_count_; }
  std::size_t relation_count() const { return relation_count_; }
  std::size_t attribute_count() const { return predicate_labels_.size() - relation_count_; }
  std::size_t relation_triple_count() const { return rel_triple_count_; }
  std::size_t attribute_triple_count() const { return triples_.size() - rel_triple_count_; }

  bool is_value(ElementId e) const { return element_is_value_[e] != 0; }
  bool is_attribute(ElementId p) const { return predicate_is_attribute_[p] != 0; }

  const std::vector<Triple>& triples() const { return triples_; }

  std::span<const std::uint32_t> triples_by_head(ElementId e) const {
    return {head_adj_.data() + head_off_[e], head_off_[e + 1] - head_off_[e]};
  }
  std::span<const std::uint32_t> triples_by_tail(ElementId e) const {
    return {tail_adj_.data() + tail_off_[e], tail_off_[e + 1] - tail_off_[e]};
  }

  const std::string& label(ElementId e) const { return element_labels_[e]; }
  const std::string& predicate_label(ElementId p) const { return predicate_labels_[p]; }

  ElementId find_entity(std::string_view label) const {
    auto it = entity_ids_.find(std::string(trim(label)));
    return it == entity_ids_.end() ? kNoElement : it->second;
  }
  // Exact lookup on the normalized literal text.
  ElementId find_value(std::string_view text) const {
    auto it = value_ids_.find(normalize_literal(text));
    return it == value_ids_.end() ? kNoElement : it->second;
  }
  ElementId find_relation(std::string_view label) const {
    auto it = relation_ids_.find(std::string(trim(label)));
    return it == relation_ids_.end() ? kNoElement : it->second;
  }
  ElementId find_attribute(std::string_view label) const {
    auto it = attribute_ids_.find(std::string(trim(label)));
    return it == attribute_ids_.end() ? kNoElement : it->second;
  }

  template <typename Fn>
  void for_each_value(Fn&& fn) const {
    for (const auto& [text, id] : value_ids_) fn(text, id);
  }

 private:
  friend class KgBuilder;
  std::vector<std::string> element_labels_;
  std::vector<char> element_is_value_;
  std::vector<std::string> predicate_labels_;
  std::vector<char> predicate_is_attribute_;
  std::vector<Triple> triples_;
  std::size_t entity_count_ = 0;
  std::size_t relation_count_ = 0;
  std::size_t rel_triple_count_ = 0;
  std::vector<std::uint32_t> head_off_, head_adj_;
  std::vector<std::uint32_t> tail_off_, tail_adj_;
  std::unordered_map<std::string, ElementId> entity_ids_;
  std::unordered_map<std::string, ElementId> value_ids_;
  std::unordered_map<std::string, ElementId> relation_ids_;
  std::unordered_map<std::string, ElementId> attribute_ids_;
};

inline KnowledgeGraph KgBuilder::freeze() {
  require_open();
  if (triples_.empty()) throw UsageError("freeze: empty graph");
  frozen_ = true;

  KnowledgeGraph kg;
  kg.element_labels_ = std::move(element_labels_);
  kg.element_is_value_ = std::move(element_is_value_);
  kg.predicate_labels_ = std::move(predicate_labels_);
  kg.predicate_is_attribute_ = std::move(predicate_is_attribute_);
  kg.triples_ = std::move(triples_);
  kg.entity_ids_ = std::move(entity_ids_);
  kg.value_ids_ = std::move(value_ids_);
  kg.relation_ids_ = std::move(relation_ids_);
  kg.attribute_ids_ = std::move(attribute_ids_);

  kg.entity_count_ = 0;
  for (char v : kg.element_is_value_)
    if (!v) ++kg.entity_count_;
  kg.relation_count_ = 0;
  for (char a : kg.predicate_is_attribute_)
    if (!a) ++kg.relation_count_;
  kg.rel_triple_count_ = 0;
  for (const Triple& t : kg.triples_)
    if (!kg.predicate_is_attribute_[t.rel]) ++kg.rel_triple_count_;

  std::size_t n = kg.element_labels_.size();
  std::size_t m = kg.triples_.size();
  kg.head_off_.assign(n + 1, 0);
  kg.tail_off_.assign(n + 1, 0);
  for (const Triple& t : kg.triples_) {
    ++kg.head_off_[t.head + 1];
    ++kg.tail_off_[t.tail + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    kg.head_off_[i + 1] += kg.head_off_[i];
    kg.tail_off_[i + 1] += kg.tail_off_[i];
  }
  kg.head_adj_.resize(m);
  kg.tail_adj_.resize(m);
  std::vector<std::uint32_t> hpos(kg.head_off_.begin(), kg.head_off_.end() - 1);
  std::vector<std::uint32_t> tpos(kg.tail_off_.begin(), kg.tail_off_.end() - 1);
  for (std::uint32_t i = 0; i < m; ++i) {
    kg.head_adj_[hpos[kg.triples_[i].head]++] = i;
    kg.tail_adj_[tpos[kg.triples_[i].tail]++] = i;
  }
  return kg;
}

// Read-only view adding, for every relation r, the inverse relation
// r_inv = r + predicate_count() with triples (t, r_inv, h). Nothing is
// copied; both directions are served from the base indexes.
class InverseAugmentedView {
 public:
  explicit InverseAugmentedView(const KnowledgeGraph& kg) : kg_(&kg) {
    const auto& triples = kg.triples();
    auto offset = static_cast<ElementId>(kg.predicate_count());
    pair_keys_.reserve(triples.size() * 2);
    pair_rels_.reserve(triples.size() * 2);
    std::vector<std::pair<std::uint64_t, ElementId>> entries;
    entries.reserve(triples.size() * 2);
    for (const Triple& t : triples) {
      entries.emplace_back(pack(t.head, t.tail), t.rel);
      entries.emplace_back(pack(t.tail, t.head), t.rel + offset);
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [k, r] : entries) {
      pair_keys_.push_back(k);
      pair_rels_.push_back(r);
    }
  }

  const KnowledgeGraph& base() const { return *kg_; }
  std::size_t predicate_count() const { return kg_->predicate_count() * 2; }
  std::size_t triple_count() const { return kg_->triples().size() * 2; }

  bool is_inverse(ElementId rel) const { return rel >= kg_->predicate_count(); }
  ElementId inverse_of(ElementId rel) const {
    auto offset = static_cast<ElementId>(kg_->predicate_count());
    return is_inverse(rel) ? rel - offset : rel + offset;
  }

  std::size_t degree(ElementId x) const {
    return kg_->triples_by_head(x).size() + kg_->triples_by_tail(x).size();
  }

  // Augmented out-edges of x: fn(rel, other) over (x, rel, other).
  template <typename Fn>
  void for_each_edge(ElementId x, Fn&& fn) const {
    const auto& triples = kg_->triples();
    auto offset = static_cast<ElementId>(kg_->predicate_count());
    for (std::uint32_t i : kg_->triples_by_head(x)) fn(triples[i].rel, triples[i].tail);
    for (std::uint32_t i : kg_->triples_by_tail(x)) fn(triples[i].rel + offset, triples[i].head);
  }

  // All augmented triples: fn(head, rel, tail).
  template <typename Fn>
  void for_each_triple(Fn&& fn) const {
    auto offset = static_cast<ElementId>(kg_->predicate_count());
    for (const Triple& t : kg_->triples()) {
      fn(t.head, t.rel, t.tail);
      fn(t.tail, t.rel + offset, t.head);
    }
  }

  // Augmented relation ids connecting h -> t (sorted, possibly repeated
  // when the base graph holds duplicate triples).
  std::span<const ElementId> relations_between(ElementId h, ElementId t) const {
    std::uint64_t key = pack(h, t);
    auto lo = std::lower_bound(pair_keys_.begin(), pair_keys_.end(), key);
    auto hi = std::upper_bound(lo, pair_keys_.end(), key);
    std::size_t b = static_cast<std::size_t>(lo - pair_keys_.begin());
    return {pair_rels_.data() + b, static_cast<std::size_t>(hi - lo)};
  }

 private:
  static std::uint64_t pack(ElementId a, ElementId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  const KnowledgeGraph* kg_;
  std::vector<std::uint64_t> pair_keys_;
  std::vector<ElementId> pair_rels_;
};

inline InverseAugmentedView augment_inverses(const KnowledgeGraph& kg) {
  return InverseAugmentedView(kg);
}

}  // namespace prase
