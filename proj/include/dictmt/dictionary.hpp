#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dictmt/corpus.hpp"

namespace dictmt {

// A source-lemma phrase paired with its target-lemma phrase. Ids are dense
// in load order after deduplication.
struct DictEntry {
  int id = 0;
  std::vector<std::string> src_lemma_phrase;
  std::vector<std::string> tgt_lemma_phrase;
};

// Corpus match statistics for one entry. Matching is contiguous and
// case-folded on lemmas; every count is per sentence pair.
struct EntryStats {
  std::int64_t occurrences = 0;       // both sides match
  std::int64_t tgt_variant_count = 0; // distinct target surface realizations
  std::int64_t src_only_count = 0;    // source matches, target does not
  std::int64_t tgt_only_count = 0;    // target matches, source does not
};

struct FilterThresholds {
  std::int64_t min_occ = 3;
  std::int64_t max_occ = 80;
  std::int64_t min_tgt_variants = 2;
  std::int64_t max_conflicts = 10;  // exclusive bound on either one-sided count
};

// Reads JSONL records {"src": "...", "tgt": "..."} or 2-column TSV. Lines
// starting with '#' are comments. Duplicate (src, tgt) pairs collapse to the
// first occurrence.
std::vector<DictEntry> load_dictionary(const std::string& path);

void save_dictionary_jsonl(std::span<const DictEntry> entries, const std::string& path);

// Lookup of entries by id; entries stay owned by the caller.
class EntryIndex {
public:
  explicit EntryIndex(std::span<const DictEntry> entries);
  const DictEntry& by_id(int entry_id) const;

private:
  std::span<const DictEntry> entries_;
  std::unordered_map<int, std::size_t> index_;
};

// Stats for all entries in one multi-pattern pass over the corpus; results
// are positionally aligned with `entries`.
std::vector<EntryStats> compute_all_stats(std::span<const DictEntry> entries,
                                          const Corpus& corpus);

EntryStats compute_entry_stats(const DictEntry& entry, const Corpus& corpus);

bool passes_filter(const EntryStats& stats, const FilterThresholds& thresholds);

// Keeps entries whose stats fall inside all thresholds; order preserved.
std::vector<DictEntry> filter_entries(std::span<const DictEntry> entries,
                                      std::span<const EntryStats> stats,
                                      const FilterThresholds& thresholds);

void write_stats_tsv(std::span<const DictEntry> entries, std::span<const EntryStats> stats,
                     const std::string& path);

}  // namespace dictmt
