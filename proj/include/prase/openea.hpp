#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "prase/errors.hpp"
#include "prase/kg.hpp"
#include "prase/text.hpp"

namespace prase {

// One aligned dataset: two frozen graphs plus the reference entity links,
// kept as label pairs. The links are test gold only; nothing trains on them.
struct DatasetPair {
  KnowledgeGraph kg1;
  KnowledgeGraph kg2;
  std::vector<std::pair<std::string, std::string>> gold;
};

struct MappingRecord {
  std::string label1;
  std::string label2;
  double prob;
};

namespace detail {

template <typename LineFn>
void read_tsv(const std::filesystem::path& file, std::size_t n_fields, LineFn&& fn) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != n_fields)
      throw DataError(file.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(n_fields) + " tab-separated fields, got " +
                      std::to_string(fields.size()));
    fn(fields);
  }
}

inline void load_graph_files(const std::filesystem::path& rel_file,
                             const std::filesystem::path& attr_file, KgBuilder& b) {
  read_tsv(rel_file, 3, [&](const std::vector<std::string_view>& f) {
    ElementId h = b.intern_element(f[0], false);
    ElementId r = b.intern_predicate(f[1], false);
    ElementId t = b.intern_element(f[2], false);
    b.add_triple(h, r, t);
  });
  read_tsv(attr_file, 3, [&](const std::vector<std::string_view>& f) {
    ElementId h = b.intern_element(f[0], false);
    ElementId a = b.intern_predicate(f[1], true);
    ElementId v = b.intern_element(f[2], true);
    b.add_triple(h, a, v);
  });
}

}  // namespace detail

// Loads a dataset directory holding rel_triples_1/2, attr_triples_1/2 and
// ent_links, every line three (links: two) tab-separated UTF-8 fields.
// Fold split subdirectories (721_5fold etc.) are ignored.
inline DatasetPair load_openea(const std::filesystem::path& dir) {
  for (const char* name :
       {"rel_triples_1", "rel_triples_2", "attr_triples_1", "attr_triples_2", "ent_links"}) {
    if (!std::filesystem::exists(dir / name))
      throw DataError("dataset file missing: " + (dir / name).string());
  }
  DatasetPair pair;
  KgBuilder b1, b2;
  detail::load_graph_files(dir / "rel_triples_1", dir / "attr_triples_1", b1);
  detail::load_graph_files(dir / "rel_triples_2", dir / "attr_triples_2", b2);
  pair.kg1 = b1.freeze();
  pair.kg2 = b2.freeze();

  std::vector<std::pair<std::string, std::string>> seen;
  detail::read_tsv(dir / "ent_links", 2, [&](const std::vector<std::string_view>& f) {
    pair.gold.emplace_back(std::string(trim(f[0])), std::string(trim(f[1])));
  });
  std::sort(pair.gold.begin(), pair.gold.end());
  pair.gold.erase(std::unique(pair.gold.begin(), pair.gold.end()), pair.gold.end());
  for (const auto& [l1, l2] : pair.gold) {
    if (pair.kg1.find_entity(l1) == kNoElement)
      throw DataError("ent_links: label not present in graph 1: " + l1);
    if (pair.kg2.find_entity(l2) == kNoElement)
      throw DataError("ent_links: label not present in graph 2: " + l2);
  }
  return pair;
}

// Tab-separated "label1 label2 prob", prob with 6 decimals, sorted by
// descending probability then label1.
inline void write_mappings(std::vector<MappingRecord> mappings,
                           const std::filesystem::path& out_path) {
  for (const MappingRecord& m : mappings)
    if (m.prob < 0.0 || m.prob > 1.0)
      throw UsageError("write_mappings: probability outside [0,1]");
  std::sort(mappings.begin(), mappings.end(), [](const MappingRecord& a, const MappingRecord& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    if (a.label1 != b.label1) return a.label1 < b.label1;
    return a.label2 < b.label2;
  });
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write " + out_path.string());
  char buf[32];
  for (const MappingRecord& m : mappings) {
    std::snprintf(buf, sizeof(buf), "%.6f", m.prob);
    out << m.label1 << '\t' << m.label2 << '\t' << buf << '\n';
  }
  if (!out) throw DataError("write failed: " + out_path.string());
}

inline std::vector<MappingRecord> read_mappings(const std::filesystem::path& path) {
  std::vector<MappingRecord> out;
  detail::read_tsv(path, 3, [&](const std::vector<std::string_view>& f) {
    MappingRecord rec;
    rec.label1 = std::string(f[0]);
    rec.label2 = std::string(f[1]);
    try {
      rec.prob = std::stod(std::string(f[2]));
    } catch (const std::exception&) {
      throw DataError(path.string() + ": bad probability '" + std::string(f[2]) + "'");
    }
    out.push_back(std::move(rec));
  });
  return out;
}

// Writes a dataset pair in the same five-file layout load_openea reads.
inline void write_openea(const DatasetPair& pair, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto dump = [&](const KnowledgeGraph& kg, const char* rel_name, const char* attr_name) {
    std::ofstream rel(dir / rel_name), attr(dir / attr_name);
    if (!rel || !attr) throw DataError("cannot write dataset files under " + dir.string());
    for (const Triple& t : kg.triples()) {
      std::ofstream& out = kg.is_attribute(t.rel) ? attr : rel;
      out << kg.label(t.head) << '\t' << kg.predicate_label(t.rel) << '\t' << kg.label(t.tail)
          << '\n';
    }
  };
  dump(pair.kg1, "rel_triples_1", "attr_triples_1");
  dump(pair.kg2, "rel_triples_2", "attr_triples_2");
  std::ofstream links(dir / "ent_links");
  if (!links) throw DataError("cannot write ent_links under " + dir.string());
  for (const auto& [l1, l2] : pair.gold) links << l1 << '\t' << l2 << '\n';
}

}  // namespace prase
