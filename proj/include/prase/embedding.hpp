#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prase/errors.hpp"
#include "prase/kg.hpp"
#include "prase/parallel.hpp"
#include "prase/stores.hpp"

namespace prase {

// Entities of either graph left unmatched by the reasoner; the embedding
// module predicts over exactly this set.
struct UnalignedSet {
  std::vector<ElementId> side1, side2;  // entity ids, ascending
  std::vector<char> in1, in2;           // element-indexed membership
};

struct SeedSet {
  std::vector<std::pair<ElementId, ElementId>> pairs;
};

struct SePrediction {
  ElementId e1, e2;
  double score;  // in [0,1]
};
struct SePredictionSet {
  std::vector<SePrediction> mappings;  // at most one per graph-1 entity
};

// Cosine similarity clamped to [0,1].
inline double cosine_clamped(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("cosine: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    static bool warned = false;
    if (!warned) {
      std::cerr << "warning: cosine similarity of a zero vector, scoring 0\n";
      warned = true;
    }
    return 0.0;
  }
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return c < 0.0 ? 0.0 : (c > 1.0 ? 1.0 : c);
}

// Trained vectors for both graphs. Graph-1 entity vectors are stored after
// applying the cross-graph transform, so similarities compare directly.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  bool empty() const { return dim_ == 0; }

  bool has1(ElementId e) const { return index1_.count(e) != 0; }
  bool has2(ElementId e) const { return index2_.count(e) != 0; }
  std::span<const double> vec1(ElementId e) const {
    return {data1_.data() + index1_.at(e) * dim_, dim_};
  }
  std::span<const double> vec2(ElementId e) const {
    return {data2_.data() + index2_.at(e) * dim_, dim_};
  }

  void add1(ElementId e, std::span<const double> v) { add(index1_, data1_, e, v); }
  void add2(ElementId e, std::span<const double> v) { add(index2_, data2_, e, v); }
  void add_rel1(ElementId r, std::span<const double> v) { add(rel_index1_, rel_data1_, r, v); }
  void add_rel2(ElementId r, std::span<const double> v) { add(rel_index2_, rel_data2_, r, v); }

  bool has_rel1(ElementId r) const { return rel_index1_.count(r) != 0; }
  bool has_rel2(ElementId r) const { return rel_index2_.count(r) != 0; }
  std::span<const double> rel1(ElementId r) const {
    return {rel_data1_.data() + rel_index1_.at(r) * dim_, dim_};
  }
  std::span<const double> rel2(ElementId r) const {
    return {rel_data2_.data() + rel_index2_.at(r) * dim_, dim_};
  }

  void set_transform(std::vector<double> m) { transform_ = std::move(m); }
  std::span<const double> transform() const { return transform_; }

  bool all_finite() const {
    auto ok = [](const std::vector<double>& v) {
      for (double x : v)
        if (!std::isfinite(x)) return false;
      return true;
    };
    return ok(data1_) && ok(data2_) && ok(rel_data1_) && ok(rel_data2_) && ok(transform_);
  }

  template <typename Fn>
  void for_each_entity(int side, Fn&& fn) const {
    const auto& index = side == 1 ? index1_ : index2_;
    const auto& data = side == 1 ? data1_ : data2_;
    std::vector<ElementId> ids;
    ids.reserve(index.size());
    for (const auto& [e, slot] : index) ids.push_back(e);
    std::sort(ids.begin(), ids.end());
    for (ElementId e : ids) fn(e, std::span<const double>{data.data() + index.at(e) * dim_, dim_});
  }

 private:
  void add(std::unordered_map<ElementId, std::size_t>& index, std::vector<double>& data,
           ElementId e, std::span<const double> v) {
    auto [it, fresh] = index.try_emplace(e, index.size());
    if (fresh) data.resize(data.size() + dim_);
    std::copy(v.begin(), v.end(), data.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
  }

  std::size_t dim_ = 0;
  std::unordered_map<ElementId, std::size_t> index1_, index2_, rel_index1_, rel_index2_;
  std::vector<double> data1_, data2_, rel_data1_, rel_data2_;
  std::vector<double> transform_;
};

struct TrainConfig {
  int dim = 100;
  double margin = 1.0;
  double learning_rate = 0.01;
  int epochs = 200;
  int negatives = 5;
  int batch_size = 1;
  std::uint64_t rng_seed = 7;

  void validate() const {
    if (dim < 1 || margin <= 0.0 || learning_rate <= 0.0 || epochs < 1 || negatives < 1 ||
        batch_size < 1)
      throw ConfigError("trainer parameters must be positive");
  }
};

namespace transe {

// Contiguous parameter block: entity vectors of graph 1 and 2, relation
// vectors of graph 1 and 2, then the row-major dim x dim transform. A flat
// layout keeps the whole state visible to finite-difference checks.
struct ParamLayout {
  std::size_t dim = 0;
  std::size_t n_ent1 = 0, n_ent2 = 0, n_rel1 = 0, n_rel2 = 0;

  std::size_t ent_off(int side, std::size_t slot) const {
    return (side == 0 ? 0 : n_ent1 * dim) + slot * dim;
  }
  std::size_t rel_off(int side, std::size_t slot) const {
    return (n_ent1 + n_ent2) * dim + (side == 0 ? 0 : n_rel1 * dim) + slot * dim;
  }
  std::size_t transform_off() const { return (n_ent1 + n_ent2 + n_rel1 + n_rel2) * dim; }
  std::size_t total() const { return transform_off() + dim * dim; }
};

struct SlotTriple {
  std::uint32_t h, r, t;
};

// One margin-ranked term: a positive triple and its corrupted copy, both in
// slot space of `side` (0 = graph 1, 1 = graph 2).
struct RankSample {
  SlotTriple pos, neg;
  int side = 0;
};

struct Batch {
  std::vector<RankSample> samples;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> seed_slots;  // (ent1, ent2)
};

struct Workspace {
  std::vector<double> u, v, w;
};

inline double norm(std::span<const double> x) {
  double s = 0;
  for (double a : x) s += a * a;
  return std::sqrt(s);
}

inline double rank_loss(const ParamLayout& L, std::span<const double> p, const RankSample& s,
                        double margin, Workspace& ws) {
  std::size_t d = L.dim;
  ws.u.assign(d, 0.0);
  ws.v.assign(d, 0.0);
  const double* h = p.data() + L.ent_off(s.side, s.pos.h);
  const double* r = p.data() + L.rel_off(s.side, s.pos.r);
  const double* t = p.data() + L.ent_off(s.side, s.pos.t);
  const double* hn = p.data() + L.ent_off(s.side, s.neg.h);
  const double* rn = p.data() + L.rel_off(s.side, s.neg.r);
  const double* tn = p.data() + L.ent_off(s.side, s.neg.t);
  for (std::size_t i = 0; i < d; ++i) {
    ws.u[i] = h[i] + r[i] - t[i];
    ws.v[i] = hn[i] + rn[i] - tn[i];
  }
  double loss = margin + norm(ws.u) - norm(ws.v);
  return loss > 0.0 ? loss : 0.0;
}

// Accumulates weight * d(rank_loss)/d(params) into out. out may alias the
// parameter block itself (SGD step with weight = -lr): all reads happen
// before the first write.
inline void add_rank_gradient(const ParamLayout& L, std::span<const double> p,
                              const RankSample& s, double margin, double weight,
                              std::span<double> out, Workspace& ws) {
  std::size_t d = L.dim;
  ws.u.assign(d, 0.0);
  ws.v.assign(d, 0.0);
  {
    const double* h = p.data() + L.ent_off(s.side, s.pos.h);
    const double* r = p.data() + L.rel_off(s.side, s.pos.r);
    const double* t = p.data() + L.ent_off(s.side, s.pos.t);
    const double* hn = p.data() + L.ent_off(s.side, s.neg.h);
    const double* rn = p.data() + L.rel_off(s.side, s.neg.r);
    const double* tn = p.data() + L.ent_off(s.side, s.neg.t);
    for (std::size_t i = 0; i < d; ++i) {
      ws.u[i] = h[i] + r[i] - t[i];
      ws.v[i] = hn[i] + rn[i] - tn[i];
    }
  }
  double dp = norm(ws.u), dn = norm(ws.v);
  if (margin + dp - dn <= 0.0) return;
  if (dp < 1e-12 || dn < 1e-12) return;  // kink; vanishing direction
  auto add = [&](std::size_t off, const std::vector<double>& g, double scale) {
    for (std::size_t i = 0; i < d; ++i) out[off + i] += weight * scale * g[i];
  };
  add(L.ent_off(s.side, s.pos.h), ws.u, 1.0 / dp);
  add(L.rel_off(s.side, s.pos.r), ws.u, 1.0 / dp);
  add(L.ent_off(s.side, s.pos.t), ws.u, -1.0 / dp);
  add(L.ent_off(s.side, s.neg.h), ws.v, -1.0 / dn);
  add(L.rel_off(s.side, s.neg.r), ws.v, -1.0 / dn);
  add(L.ent_off(s.side, s.neg.t), ws.v, 1.0 / dn);
}

inline double seed_loss(const ParamLayout& L, std::span<const double> p, std::uint32_t s1,
                        std::uint32_t s2, Workspace& ws) {
  std::size_t d = L.dim;
  ws.u.assign(d, 0.0);
  const double* e1 = p.data() + L.ent_off(0, s1);
  const double* e2 = p.data() + L.ent_off(1, s2);
  const double* m = p.data() + L.transform_off();
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < d; ++j) acc += m[i * d + j] * e1[j];
    ws.u[i] = acc - e2[i];
  }
  return norm(ws.u);
}

inline void add_seed_gradient(const ParamLayout& L, std::span<const double> p, std::uint32_t s1,
                              std::uint32_t s2, double weight, std::span<double> out,
                              Workspace& ws) {
  std::size_t d = L.dim;
  ws.u.assign(d, 0.0);
  ws.w.assign(d, 0.0);
  const double* e1 = p.data() + L.ent_off(0, s1);
  const double* e2 = p.data() + L.ent_off(1, s2);
  const double* m = p.data() + L.transform_off();
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < d; ++j) acc += m[i * d + j] * e1[j];
    ws.u[i] = acc - e2[i];
  }
  double dist = norm(ws.u);
  if (dist < 1e-12) return;
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0;
    for (std::size_t i = 0; i < d; ++i) acc += m[i * d + j] * ws.u[i];
    ws.w[j] = acc;  // M^T u
  }
  // snapshot e1 before any aliased write to it
  ws.v.assign(e1, e1 + d);
  std::size_t moff = L.transform_off();
  for (std::size_t j = 0; j < d; ++j) out[L.ent_off(0, s1) + j] += weight * ws.w[j] / dist;
  for (std::size_t i = 0; i < d; ++i) out[L.ent_off(1, s2) + i] -= weight * ws.u[i] / dist;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out[moff + i * d + j] += weight * ws.u[i] * ws.v[j] / dist;
}

inline double batch_loss(const ParamLayout& L, std::span<const double> p, const Batch& batch,
                         double margin) {
  Workspace ws;
  double total = 0;
  for (const RankSample& s : batch.samples) total += rank_loss(L, p, s, margin, ws);
  for (auto [s1, s2] : batch.seed_slots) total += seed_loss(L, p, s1, s2, ws);
  return total;
}

inline void batch_gradient(const ParamLayout& L, std::span<const double> p, const Batch& batch,
                           double margin, std::vector<double>& grad) {
  Workspace ws;
  grad.assign(L.total(), 0.0);
  for (const RankSample& s : batch.samples)
    add_rank_gradient(L, p, s, margin, 1.0, grad, ws);
  for (auto [s1, s2] : batch.seed_slots) add_seed_gradient(L, p, s1, s2, 1.0, grad, ws);
}

inline std::vector<double> initialize_params(const ParamLayout& L, std::mt19937_64& rng) {
  std::vector<double> params(L.total(), 0.0);
  double bound = 6.0 / std::sqrt(static_cast<double>(L.dim));
  std::uniform_real_distribution<double> uni(-bound, bound);
  std::size_t vec_end = L.transform_off();
  for (std::size_t i = 0; i < vec_end; ++i) params[i] = uni(rng);
  for (std::size_t i = 0; i < L.dim; ++i) params[L.transform_off() + i * L.dim + i] = 1.0;
  return params;
}

}  // namespace transe

// Pluggable embedding model: trains on reasoner-selected seed pairs and
// exports comparable entity vectors for both graphs.
class SeModel {
 public:
  virtual ~SeModel() = default;
  virtual EmbeddingSet train(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                             const SeedSet& seeds, const TrainConfig& cfg) = 0;
  virtual std::string name() const = 0;
};

// Translational reference model: margin-ranked triple loss over both graphs
// with uniform negative corruption, plus a seed-supervised linear transform
// pulling graph-1 vectors into the graph-2 space.
class TransEModel final : public SeModel {
 public:
  std::string name() const override { return "transe"; }

  EmbeddingSet train(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2, const SeedSet& seeds,
                     const TrainConfig& cfg) override {
    cfg.validate();
    if (seeds.pairs.empty())
      throw TrainingError("embedding training needs at least one alignment seed");
    if (kg1.relation_triple_count() == 0 || kg2.relation_triple_count() == 0)
      throw TrainingError("embedding training needs relation triples in both graphs");

    Side s1 = index_side(kg1);
    Side s2 = index_side(kg2);
    transe::ParamLayout layout;
    layout.dim = static_cast<std::size_t>(cfg.dim);
    layout.n_ent1 = s1.ent_of_slot.size();
    layout.n_ent2 = s2.ent_of_slot.size();
    layout.n_rel1 = s1.rel_of_slot.size();
    layout.n_rel2 = s2.rel_of_slot.size();

    std::mt19937_64 rng(cfg.rng_seed);
    std::vector<double> params = transe::initialize_params(layout, rng);
    normalize_entities(layout, params);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> seed_slots;
    for (auto [e1, e2] : seeds.pairs) {
      auto i1 = s1.slot_of_ent.find(e1);
      auto i2 = s2.slot_of_ent.find(e2);
      if (i1 != s1.slot_of_ent.end() && i2 != s2.slot_of_ent.end())
        seed_slots.emplace_back(i1->second, i2->second);
    }
    if (seed_slots.empty())
      throw TrainingError("no seed pair is covered by relation triples on both sides");

    std::vector<std::uint32_t> order(s1.triples.size() + s2.triples.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::uint32_t> seed_order(seed_slots.size());
    for (std::uint32_t i = 0; i < seed_order.size(); ++i) seed_order[i] = i;

    transe::Workspace ws;
    double lr = cfg.learning_rate;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double epoch_loss = 0;
      for (std::uint32_t idx : order) {
        int side = idx < s1.triples.size() ? 0 : 1;
        const Side& sd = side == 0 ? s1 : s2;
        const transe::SlotTriple& pos =
            sd.triples[side == 0 ? idx : idx - s1.triples.size()];
        for (int j = 0; j < cfg.negatives; ++j) {
          transe::RankSample sample{pos, corrupt(sd, pos, rng), side};
          double l = transe::rank_loss(layout, params, sample, cfg.margin, ws);
          if (l > 0.0) {
            epoch_loss += l;
            transe::add_rank_gradient(layout, params, sample, cfg.margin, -lr, params, ws);
          }
        }
      }
      std::shuffle(seed_order.begin(), seed_order.end(), rng);
      for (std::uint32_t si : seed_order) {
        auto [a, b] = seed_slots[si];
        epoch_loss += transe::seed_loss(layout, params, a, b, ws);
        transe::add_seed_gradient(layout, params, a, b, -lr, params, ws);
      }
      if (!std::isfinite(epoch_loss))
        throw TrainingError("training diverged (non-finite loss at epoch " +
                            std::to_string(epoch) + "); lower the learning rate");
      normalize_entities(layout, params);
    }

    return package(layout, params, s1, s2);
  }

 private:
  struct Side {
    std::vector<transe::SlotTriple> triples;
    std::vector<ElementId> ent_of_slot, rel_of_slot;
    std::unordered_map<ElementId, std::uint32_t> slot_of_ent, slot_of_rel;
    std::unordered_set<std::uint64_t> truth;
  };

  // Slots cover only entities and relations that occur in relation triples;
  // everything else stays vectorless and is skipped downstream.
  static Side index_side(const KnowledgeGraph& kg) {
    Side s;
    auto ent_slot = [&](ElementId e) {
      auto [it, fresh] = s.slot_of_ent.try_emplace(e, s.ent_of_slot.size());
      if (fresh) s.ent_of_slot.push_back(e);
      return it->second;
    };
    auto rel_slot = [&](ElementId r) {
      auto [it, fresh] = s.slot_of_rel.try_emplace(r, s.rel_of_slot.size());
      if (fresh) s.rel_of_slot.push_back(r);
      return it->second;
    };
    for (const Triple& t : kg.triples()) {
      if (kg.is_attribute(t.rel)) continue;
      transe::SlotTriple st{ent_slot(t.head), rel_slot(t.rel), ent_slot(t.tail)};
      s.triples.push_back(st);
      s.truth.insert(pack(st));
    }
    return s;
  }

  static std::uint64_t pack(const transe::SlotTriple& t) {
    return (static_cast<std::uint64_t>(t.h) << 42) | (static_cast<std::uint64_t>(t.r) << 21) |
           t.t;
  }

  static transe::SlotTriple corrupt(const Side& sd, const transe::SlotTriple& pos,
                                    std::mt19937_64& rng) {
    std::uint32_t n = static_cast<std::uint32_t>(sd.ent_of_slot.size());
    for (int tries = 0; tries < 32; ++tries) {
      transe::SlotTriple neg = pos;
      if (rng() & 1)
        neg.h = static_cast<std::uint32_t>(rng() % n);
      else
        neg.t = static_cast<std::uint32_t>(rng() % n);
      if (!sd.truth.count(pack(neg))) return neg;
    }
    transe::SlotTriple neg = pos;
    neg.h = static_cast<std::uint32_t>(rng() % n);
    return neg;
  }

  static void normalize_entities(const transe::ParamLayout& L, std::vector<double>& params) {
    std::size_t d = L.dim;
    for (std::size_t v = 0; v < L.n_ent1 + L.n_ent2; ++v) {
      double* x = params.data() + v * d;
      double n = transe::norm({x, d});
      if (n > 0)
        for (std::size_t i = 0; i < d; ++i) x[i] /= n;
    }
  }

  static EmbeddingSet package(const transe::ParamLayout& L, const std::vector<double>& params,
                              const Side& s1, const Side& s2) {
    std::size_t d = L.dim;
    EmbeddingSet emb(d);
    const double* m = params.data() + L.transform_off();
    std::vector<double> tmp(d);
    for (std::uint32_t slot = 0; slot < s1.ent_of_slot.size(); ++slot) {
      const double* e = params.data() + L.ent_off(0, slot);
      for (std::size_t i = 0; i < d; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < d; ++j) acc += m[i * d + j] * e[j];
        tmp[i] = acc;
      }
      emb.add1(s1.ent_of_slot[slot], tmp);
    }
    for (std::uint32_t slot = 0; slot < s2.ent_of_slot.size(); ++slot)
      emb.add2(s2.ent_of_slot[slot], {params.data() + L.ent_off(1, slot), d});
    for (std::uint32_t slot = 0; slot < s1.rel_of_slot.size(); ++slot)
      emb.add_rel1(s1.rel_of_slot[slot], {params.data() + L.rel_off(0, slot), d});
    for (std::uint32_t slot = 0; slot < s2.rel_of_slot.size(); ++slot)
      emb.add_rel2(s2.rel_of_slot[slot], {params.data() + L.rel_off(1, slot), d});
    emb.set_transform({params.begin() + static_cast<std::ptrdiff_t>(L.transform_off()),
                       params.end()});
    if (!emb.all_finite()) throw TrainingError("non-finite embedding after training");
    return emb;
  }
};

// Nearest unaligned graph-2 entity for each unaligned graph-1 entity, by
// cosine similarity; scores clamp at 0. Entities without a vector are
// skipped on either side.
inline SePredictionSet predict(const EmbeddingSet& emb, const UnalignedSet& unaligned,
                               bool mutual_nn = false, int workers = 0) {
  SePredictionSet out;
  if (emb.empty()) return out;
  std::vector<ElementId> cand2;
  for (ElementId e2 : unaligned.side2)
    if (emb.has2(e2)) cand2.push_back(e2);
  std::vector<ElementId> src1;
  for (ElementId e1 : unaligned.side1)
    if (emb.has1(e1)) src1.push_back(e1);
  if (src1.empty() || cand2.empty()) return out;

  std::vector<SePrediction> results(src1.size(), SePrediction{kNoElement, kNoElement, 0.0});
  constexpr std::size_t kBlock = 64;
  std::size_t n_blocks = (src1.size() + kBlock - 1) / kBlock;
  run_blocks(n_blocks, workers, [&](std::size_t b) {
    std::size_t lo = b * kBlock, hi = std::min(src1.size(), lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      std::span<const double> v1 = emb.vec1(src1[i]);
      ElementId best = kNoElement;
      double best_cos = -2.0;
      for (ElementId e2 : cand2) {
        double c = cosine_clamped(v1, emb.vec2(e2));
        if (c > best_cos) {
          best_cos = c;
          best = e2;
        }
      }
      results[i] = {src1[i], best, best_cos < 0.0 ? 0.0 : best_cos};
    }
  });

  if (mutual_nn) {
    for (SePrediction& p : results) {
      std::span<const double> v2 = emb.vec2(p.e2);
      ElementId back = kNoElement;
      double best_cos = -2.0;
      for (ElementId e1 : src1) {
        double c = cosine_clamped(emb.vec1(e1), v2);
        if (c > best_cos) {
          best_cos = c;
          back = e1;
        }
      }
      if (back != p.e1) p.e1 = kNoElement;
    }
  }
  for (const SePrediction& p : results)
    if (p.e1 != kNoElement) out.mappings.push_back(p);
  return out;
}

// One line per entity: "label<TAB>v1,v2,...". Graph 1 first, then graph 2.
inline void write_vectors(const EmbeddingSet& emb, const KnowledgeGraph& kg1,
                          const KnowledgeGraph& kg2, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  auto dump = [&](int side, const KnowledgeGraph& kg) {
    emb.for_each_entity(side, [&](ElementId e, std::span<const double> v) {
      out << kg.label(e) << '\t';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        out << v[i];
      }
      out << '\n';
    });
  };
  dump(1, kg1);
  dump(2, kg2);
}

}  // namespace prase
