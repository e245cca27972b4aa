// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/corpus/tokenizer.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

enum class Split { kTrain, kValid, kTest };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "valid") return Split::kValid;
  if (s == "test") return Split::kTest;
  throw DataError("unknown split '" + std::string(s) +
                  "' (expected train, valid or test)");
}

/// One manifest row. Parallel entries name two files (source,target);
/// provenance then describes the target side.
struct ManifestEntry {
  std::string id;
  std::vector<std::string> paths;
  std::string language;
  Provenance provenance = Provenance::kHuman;
  Split split = Split::kTrain;
  std::size_t sentences = 0;

  bool parallel() const { return paths.size() == 2; }
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;

  std::vector<std::string> ids(Split s) const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (e.split == s) out.push_back(e.id);
    return out;
  }

  std::size_t sentence_count(Split s) const {
    std::size_t n = 0;
    for (const auto& e : entries)
      if (e.split == s) n += e.sentences;
    return n;
  }

  const ManifestEntry& entry(const std::string& id) const {
    for (const auto& e : entries)
      if (e.id == id) return e;
    throw DataError("manifest has no entry '" + id + "'");
  }
};

/// Everything a manifest points at, tokenized. Parallel entries yield both
/// pairs and a target-side document with the entry's provenance.
struct LoadedCorpus {
  CorpusManifest manifest;
  std::vector<Document> documents;
  std::vector<ParallelPair> pairs;

  std::vector<ParallelPair> pairs_in(Split s) const {
    std::set<std::string> ids;
    for (const auto& e : manifest.entries)
      if (e.split == s && e.parallel()) ids.insert(e.id);
    std::vector<ParallelPair> out;
    for (const auto& p : pairs)
      if (ids.count(p.book_id)) out.push_back(p);
    return out;
  }

  /// Pairs from parallel entries of a given split whose target provenance
  /// matches (the Tagging baseline separates OR-target from HT-target data).
  std::vector<ParallelPair> pairs_in(Split s, Provenance target) const {
    std::set<std::string> ids;
    for (const auto& e : manifest.entries)
      if (e.split == s && e.parallel() && e.provenance == target) ids.insert(e.id);
    std::vector<ParallelPair> out;
    for (const auto& p : pairs)
      if (ids.count(p.book_id)) out.push_back(p);
    return out;
  }

  /// Monolingual and target-side documents of a split.
  std::vector<Document> documents_in(Split s) const {
    std::vector<Document> out;
    for (const auto& d : documents)
      if (manifest.entry(d.id).split == s) out.push_back(d);
    return out;
  }
};

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

namespace detail {

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace detail

/// Manifest rows: id <TAB> path[,path] <TAB> language <TAB> provenance <TAB>
/// split. Blank lines and lines starting with '#' are ignored.
inline CorpusManifest parse_manifest(const std::filesystem::path& manifest_path) {
  CorpusManifest m;
  std::set<std::string> seen;
  int lineno = 0;
  for (const auto& line : read_lines(manifest_path)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = detail::split_on(line, '\t');
    if (cols.size() != 5)
      throw DataError(manifest_path.string() + ":" + std::to_string(lineno) +
                      ": expected 5 tab-separated columns, got " +
                      std::to_string(cols.size()));
    ManifestEntry e;
    e.id = cols[0];
    e.paths = detail::split_on(cols[1], ',');
    e.language = cols[2];
    try {
      e.provenance = parse_provenance(cols[3]);
      e.split = parse_split(cols[4]);
    } catch (const DataError& err) {
      throw DataError(manifest_path.string() + ":" + std::to_string(lineno) +
                      ": " + err.what());
    }
    if (e.id.empty() || e.paths.empty() || e.paths.size() > 2)
      throw DataError(manifest_path.string() + ":" + std::to_string(lineno) +
                      ": need an id and one or two paths");
    if (!seen.insert(e.id).second)
      throw DataError("duplicate manifest id '" + e.id + "'");
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline LoadedCorpus load_corpus(const std::filesystem::path& manifest_path,
                                const std::filesystem::path& data_dir,
                                bool lowercase = false) {
  LoadedCorpus c;
  c.manifest = parse_manifest(manifest_path);
  for (auto& e : c.manifest.entries) {
    if (e.parallel()) {
      const auto src_path = data_dir / e.paths[0];
      const auto tgt_path = data_dir / e.paths[1];
      auto src = read_lines(src_path);
      auto tgt = read_lines(tgt_path);
      if (src.size() != tgt.size())
        throw DataError("line count mismatch: " + src_path.string() + " has " +
                        std::to_string(src.size()) + " lines, " +
                        tgt_path.string() + " has " + std::to_string(tgt.size()));
      Document doc{e.id, e.language, e.provenance, {}};
      for (std::size_t i = 0; i < src.size(); ++i) {
        ParallelPair p{tokenize(src[i], lowercase), tokenize(tgt[i], lowercase), e.id};
        if (p.source.empty() || p.target.empty())
          throw DataError(src_path.string() + ":" + std::to_string(i + 1) +
                          ": empty side in parallel pair");
        doc.sentences.push_back(p.target);
        c.pairs.push_back(std::move(p));
      }
      e.sentences = src.size();
      c.documents.push_back(std::move(doc));
    } else {
      Document doc{e.id, e.language, e.provenance, {}};
      for (const auto& line : read_lines(data_dir / e.paths[0])) {
        auto s = tokenize(line, lowercase);
        if (!s.empty()) doc.sentences.push_back(std::move(s));
      }
      e.sentences = doc.sentences.size();
      c.documents.push_back(std::move(doc));
    }
  }
  return c;
}

}  // namespace natalign
