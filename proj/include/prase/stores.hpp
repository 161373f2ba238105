#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prase/errors.hpp"
#include "prase/kg.hpp"

namespace prase {

// Per-relation functionality F(r) = |distinct heads| / |distinct (head,tail)|
// and the tail-side analogue. Indexed by augmented relation id: the inverse
// relation swaps the two. Values are fixed once computed for a graph.
class FunctionalityTable {
 public:
  FunctionalityTable() = default;

  double functionality(ElementId rel) const {
    return rel < func_.size() ? func_[rel] : 0.0;
  }
  double inverse_functionality(ElementId rel) const {
    return rel < inv_func_.size() ? inv_func_[rel] : 0.0;
  }

  // Distinct counts for the base (non-inverse) relation ids.
  std::uint64_t distinct_heads(ElementId rel) const { return heads_[rel]; }
  std::uint64_t distinct_tails(ElementId rel) const { return tails_[rel]; }
  std::uint64_t distinct_pairs(ElementId rel) const { return pairs_[rel]; }
  std::size_t base_relation_count() const { return heads_.size(); }

 private:
  friend FunctionalityTable compute_functionalities(const InverseAugmentedView&);
  std::vector<double> func_, inv_func_;           // sized 2 * base predicates
  std::vector<std::uint64_t> heads_, tails_, pairs_;  // sized base predicates
};

inline FunctionalityTable compute_functionalities(const InverseAugmentedView& kg) {
  const KnowledgeGraph& base = kg.base();
  std::size_t p = base.predicate_count();
  std::vector<std::vector<std::uint64_t>> pair_sets(p);
  for (const Triple& t : base.triples())
    pair_sets[t.rel].push_back((static_cast<std::uint64_t>(t.head) << 32) | t.tail);

  FunctionalityTable table;
  table.func_.assign(2 * p, 0.0);
  table.inv_func_.assign(2 * p, 0.0);
  table.heads_.assign(p, 0);
  table.tails_.assign(p, 0);
  table.pairs_.assign(p, 0);

  std::vector<std::uint64_t> scratch;
  for (std::size_t r = 0; r < p; ++r) {
    auto& pairs = pair_sets[r];
    if (pairs.empty()) continue;  // no triples: lookups stay 0
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    scratch.clear();
    for (std::uint64_t k : pairs) scratch.push_back(k >> 32);
    std::sort(scratch.begin(), scratch.end());
    std::uint64_t n_heads =
        static_cast<std::uint64_t>(std::unique(scratch.begin(), scratch.end()) - scratch.begin());

    scratch.clear();
    for (std::uint64_t k : pairs) scratch.push_back(k & 0xffffffffu);
    std::sort(scratch.begin(), scratch.end());
    std::uint64_t n_tails =
        static_cast<std::uint64_t>(std::unique(scratch.begin(), scratch.end()) - scratch.begin());

    std::uint64_t n_pairs = pairs.size();
    table.heads_[r] = n_heads;
    table.tails_[r] = n_tails;
    table.pairs_[r] = n_pairs;
    double f = static_cast<double>(n_heads) / static_cast<double>(n_pairs);
    double finv = static_cast<double>(n_tails) / static_cast<double>(n_pairs);
    table.func_[r] = f;
    table.inv_func_[r] = finv;
    table.func_[r + p] = finv;  // inverse relation swaps the roles
    table.inv_func_[r + p] = f;
  }
  return table;
}

// Sparse cross-graph equivalence probabilities. Zeros are never stored.
// Rows are kept sorted by counterpart id, and both directions are
// maintained, so iteration order is deterministic however pairs were set.
class EntityMappingStore {
 public:
  using Match = std::pair<ElementId, double>;

  EntityMappingStore() = default;
  EntityMappingStore(std::size_t side1_elements, std::size_t side2_elements)
      : fwd_(side1_elements), rev_(side2_elements) {}

  std::size_t side1_size() const { return fwd_.size(); }
  std::size_t side2_size() const { return rev_.size(); }
  std::size_t pair_count() const { return pairs_; }

  void set(ElementId e1, ElementId e2, double p) {
    p = std::clamp(p, 0.0, 1.0);
    if (p <= 0.0) {
      erase(e1, e2);
      return;
    }
    upsert(fwd_[e1], e2, p);
    if (upsert(rev_[e2], e1, p)) ++pairs_;
  }

  double prob(ElementId e1, ElementId e2) const {
    for (const Match& m : fwd_[e1])
      if (m.first == e2) return m.second;
    return 0.0;
  }

  std::span<const Match> matches1(ElementId e1) const { return fwd_[e1]; }
  std::span<const Match> matches2(ElementId e2) const { return rev_[e2]; }

  // Highest-probability counterpart; ties break to the smaller id.
  Match best1(ElementId e1) const { return best_of(fwd_[e1]); }
  Match best2(ElementId e2) const { return best_of(rev_[e2]); }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (ElementId e1 = 0; e1 < fwd_.size(); ++e1)
      for (const Match& m : fwd_[e1]) fn(e1, m.first, m.second);
  }

  // Largest absolute probability change between two stores; pairs present
  // on one side only count with their full probability.
  double max_delta(const EntityMappingStore& other) const {
    double delta = 0.0;
    std::size_t n = std::max(fwd_.size(), other.fwd_.size());
    for (std::size_t e1 = 0; e1 < n; ++e1) {
      std::span<const Match> a =
          e1 < fwd_.size() ? std::span<const Match>(fwd_[e1]) : std::span<const Match>();
      std::span<const Match> b = e1 < other.fwd_.size() ? std::span<const Match>(other.fwd_[e1])
                                                        : std::span<const Match>();
      std::size_t i = 0, j = 0;
      while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
          delta = std::max(delta, a[i].second);
          ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
          delta = std::max(delta, b[j].second);
          ++j;
        } else {
          delta = std::max(delta, std::fabs(a[i].second - b[j].second));
          ++i;
          ++j;
        }
      }
    }
    return delta;
  }

  void swap_row(ElementId e1, std::vector<Match>&& row) {
    for (const Match& m : fwd_[e1]) drop_rev(m.first, e1);
    pairs_ -= fwd_[e1].size();
    fwd_[e1] = std::move(row);
    std::sort(fwd_[e1].begin(), fwd_[e1].end(),
              [](const Match& a, const Match& b) { return a.first < b.first; });
    pairs_ += fwd_[e1].size();
    for (const Match& m : fwd_[e1]) upsert(rev_[m.first], e1, m.second);
  }

 private:
  static Match best_of(const std::vector<Match>& row) {
    Match best{kNoElement, 0.0};
    for (const Match& m : row)
      if (m.second > best.second || (m.second == best.second && m.first < best.first))
        best = m;
    return best;
  }

  static bool upsert(std::vector<Match>& row, ElementId id, double p) {
    auto it = std::lower_bound(row.begin(), row.end(), id,
                               [](const Match& m, ElementId v) { return m.first < v; });
    if (it != row.end() && it->first == id) {
      it->second = p;
      return false;
    }
    row.insert(it, {id, p});
    return true;
  }

  void drop_rev(ElementId e2, ElementId e1) {
    auto& row = rev_[e2];
    auto it = std::lower_bound(row.begin(), row.end(), e1,
                               [](const Match& m, ElementId v) { return m.first < v; });
    if (it != row.end() && it->first == e1) row.erase(it);
  }

  void erase(ElementId e1, ElementId e2) {
    auto& row = fwd_[e1];
    auto it = std::lower_bound(row.begin(), row.end(), e2,
                               [](const Match& m, ElementId v) { return m.first < v; });
    if (it != row.end() && it->first == e2) {
      row.erase(it);
      drop_rev(e2, e1);
      --pairs_;
    }
  }

  std::vector<std::vector<Match>> fwd_, rev_;
  std::size_t pairs_ = 0;
};

// Sparse sub-relation probabilities over augmented relation ids, both
// directions. Freshly initialized stores answer a constant for every pair
// (no dense materialization); after the first recomputation absent means 0.
class SubRelationStore {
 public:
  SubRelationStore() = default;

  static SubRelationStore constant_init(double theta) {
    if (!(theta > 0.0 && theta < 1.0))
      throw ConfigError("initial sub-relation probability must lie in (0,1)");
    SubRelationStore s;
    s.uniform_ = true;
    s.theta_ = theta;
    return s;
  }

  bool uniform() const { return uniform_; }

  // P(r1 subsumed-by r2), r1 from graph 1, r2 from graph 2.
  double forward(ElementId r1, ElementId r2) const {
    if (uniform_) return theta_;
    auto it = fwd_.find(pack(r1, r2));
    return it == fwd_.end() ? 0.0 : it->second;
  }
  // P(r2 subsumed-by r1).
  double backward(ElementId r2, ElementId r1) const {
    if (uniform_) return theta_;
    auto it = bwd_.find(pack(r2, r1));
    return it == bwd_.end() ? 0.0 : it->second;
  }

  void set_forward(ElementId r1, ElementId r2, double p) {
    uniform_ = false;
    fwd_[pack(r1, r2)] = std::clamp(p, 0.0, 1.0);
  }
  void set_backward(ElementId r2, ElementId r1, double p) {
    uniform_ = false;
    bwd_[pack(r2, r1)] = std::clamp(p, 0.0, 1.0);
  }

  std::size_t forward_size() const { return fwd_.size(); }
  std::size_t backward_size() const { return bwd_.size(); }

  template <typename Fn>
  void for_each_forward(Fn&& fn) const {
    for (const auto& [k, p] : fwd_) fn(static_cast<ElementId>(k >> 32),
                                       static_cast<ElementId>(k & 0xffffffffu), p);
  }
  template <typename Fn>
  void for_each_backward(Fn&& fn) const {
    for (const auto& [k, p] : bwd_) fn(static_cast<ElementId>(k >> 32),
                                       static_cast<ElementId>(k & 0xffffffffu), p);
  }

 private:
  static std::uint64_t pack(ElementId a, ElementId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  bool uniform_ = false;
  double theta_ = 0.0;
  std::unordered_map<std::uint64_t, double> fwd_, bwd_;
};

}  // namespace prase
