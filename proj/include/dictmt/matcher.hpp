#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dictmt/corpus.hpp"
#include "dictmt/dictionary.hpp"

namespace dictmt {

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;

  std::size_t end() const { return start + length; }
  bool overlaps(const Span& other) const {
    return start < other.end() && other.start < end();
  }
  bool operator==(const Span&) const = default;
};

// One entry occurring in one sentence pair. A side's span is absent when the
// entry's phrase does not match that side. When an entry matches a side more
// than once, the leftmost match is kept.
struct MatchRecord {
  int sentence_id = -1;
  int entry_id = -1;
  std::optional<Span> src_span;
  std::optional<Span> tgt_span;
  std::vector<std::string> src_surface;
  std::vector<std::string> tgt_surface;
};

// All contiguous case-folded matches of `phrase` in `lemmas`, left to right,
// overlapping matches included.
std::vector<Span> match_side(std::span<const std::string> lemmas,
                             std::span<const std::string> phrase);

// Matches every entry against every sentence pair via an Aho-Corasick
// automaton over interned lemma ids, so the cost is linear in corpus size
// plus pattern size instead of entries x sentences. Output is sorted by
// (sentence_id, source start, entry_id); records without a source span sort
// after those with one.
std::vector<MatchRecord> find_matches(const Corpus& corpus, std::span<const DictEntry> entries);

// Resolves overlapping source spans among one sentence's records for
// annotation: longest match wins, ties go to the lower entry id. Records
// without a source span are dropped. Result is sorted by source start.
std::vector<MatchRecord> select_annotation_matches(std::span<const MatchRecord> records);

void write_matches_jsonl(std::span<const MatchRecord> records, const std::string& path);
std::vector<MatchRecord> read_matches_jsonl(const std::string& path);

}  // namespace dictmt
