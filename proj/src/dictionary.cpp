#include "dictmt/dictionary.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dictmt/error.hpp"
#include "dictmt/matcher.hpp"
#include "dictmt/text.hpp"

namespace dictmt {

namespace {

std::vector<std::string> parse_phrase(const std::string& text, const std::string& path,
                                      std::size_t lineno, const char* which) {
  std::vector<std::string> phrase = split_whitespace(text);
  if (phrase.empty())
    throw DataError(path + ":" + std::to_string(lineno) + ": empty " + which + " phrase");
  return phrase;
}

}  // namespace

std::vector<DictEntry> load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dictionary: " + path);

  std::vector<DictEntry> entries;
  std::set<std::pair<std::string, std::string>> seen;
  std::set<int> used_ids;
  std::string line;
  std::size_t lineno = 0;
  int next_id = 0;
  bool jsonl = false;
  bool format_known = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!format_known) {
      jsonl = line[0] == '{';
      format_known = true;
    }

    std::string src_text, tgt_text;
    int explicit_id = -1;
    if (jsonl) {
      nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.contains("src") || !record.contains("tgt") ||
          !record["src"].is_string() || !record["tgt"].is_string())
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": malformed dictionary record, expected {\"src\": ..., \"tgt\": ...}");
      src_text = record["src"].get<std::string>();
      tgt_text = record["tgt"].get<std::string>();
      // An explicit id (as written by save_dictionary_jsonl) survives the
      // round trip, so a filtered dictionary keeps the original ids used in
      // manifests and match files.
      if (record.contains("id")) {
        if (!record["id"].is_number_integer())
          throw DataError(path + ":" + std::to_string(lineno) + ": id must be an integer");
        explicit_id = record["id"].get<int>();
      }
    } else {
      std::size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw DataError(path + ":" + std::to_string(lineno) + ": expected src<TAB>tgt");
      src_text = line.substr(0, tab);
      tgt_text = line.substr(tab + 1);
    }

    DictEntry entry;
    entry.src_lemma_phrase = parse_phrase(src_text, path, lineno, "source");
    entry.tgt_lemma_phrase = parse_phrase(tgt_text, path, lineno, "target");
    auto key = std::make_pair(join(entry.src_lemma_phrase), join(entry.tgt_lemma_phrase));
    if (!seen.insert(key).second) continue;
    if (explicit_id >= 0) {
      entry.id = explicit_id;
    } else {
      while (used_ids.count(next_id)) ++next_id;
      entry.id = next_id;
    }
    if (!used_ids.insert(entry.id).second)
      throw DataError(path + ":" + std::to_string(lineno) + ": duplicate entry id " +
                      std::to_string(entry.id));
    entries.push_back(std::move(entry));
  }
  return entries;
}

void save_dictionary_jsonl(std::span<const DictEntry> entries, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dictionary: " + path);
  for (const DictEntry& entry : entries) {
    nlohmann::ordered_json record;
    record["id"] = entry.id;
    record["src"] = join(entry.src_lemma_phrase);
    record["tgt"] = join(entry.tgt_lemma_phrase);
    out << record.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

EntryIndex::EntryIndex(std::span<const DictEntry> entries) : entries_(entries) {
  index_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) index_.emplace(entries[i].id, i);
}

const DictEntry& EntryIndex::by_id(int entry_id) const {
  auto it = index_.find(entry_id);
  if (it == index_.end()) throw DataError("unknown entry id " + std::to_string(entry_id));
  return entries_[it->second];
}

std::vector<EntryStats> compute_all_stats(std::span<const DictEntry> entries,
                                          const Corpus& corpus) {
  std::vector<EntryStats> stats(entries.size());
  std::unordered_map<int, std::size_t> pos;
  pos.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) pos.emplace(entries[i].id, i);

  std::vector<std::set<std::string>> variants(entries.size());
  for (const MatchRecord& record : find_matches(corpus, entries)) {
    EntryStats& s = stats[pos.at(record.entry_id)];
    if (record.src_span && record.tgt_span) {
      ++s.occurrences;
      variants[pos.at(record.entry_id)].insert(join(record.tgt_surface));
    } else if (record.src_span) {
      ++s.src_only_count;
    } else {
      ++s.tgt_only_count;
    }
  }
  for (std::size_t i = 0; i < entries.size(); ++i)
    stats[i].tgt_variant_count = static_cast<std::int64_t>(variants[i].size());
  return stats;
}

EntryStats compute_entry_stats(const DictEntry& entry, const Corpus& corpus) {
  return compute_all_stats({&entry, 1}, corpus)[0];
}

bool passes_filter(const EntryStats& stats, const FilterThresholds& t) {
  return stats.occurrences >= t.min_occ && stats.occurrences <= t.max_occ &&
         stats.tgt_variant_count >= t.min_tgt_variants && stats.src_only_count < t.max_conflicts &&
         stats.tgt_only_count < t.max_conflicts;
}

std::vector<DictEntry> filter_entries(std::span<const DictEntry> entries,
                                      std::span<const EntryStats> stats,
                                      const FilterThresholds& thresholds) {
  if (entries.size() != stats.size())
    throw DataError("filter_entries: entries and stats have different sizes");
  if (thresholds.min_occ > thresholds.max_occ || thresholds.min_occ < 0 ||
      thresholds.min_tgt_variants < 0 || thresholds.max_conflicts < 0)
    throw DataError("filter thresholds out of range: need 0 <= min_occ <= max_occ and "
                    "non-negative variant/conflict bounds");
  std::vector<DictEntry> accepted;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (passes_filter(stats[i], thresholds)) accepted.push_back(entries[i]);
  return accepted;
}

void write_stats_tsv(std::span<const DictEntry> entries, std::span<const EntryStats> stats,
                     const std::string& path) {
  if (entries.size() != stats.size())
    throw DataError("write_stats_tsv: entries and stats have different sizes");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write stats: " + path);
  out << "entry_id\tsrc\ttgt\toccurrences\ttgt_variants\tsrc_only\ttgt_only\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << entries[i].id << '\t' << join(entries[i].src_lemma_phrase) << '\t'
        << join(entries[i].tgt_lemma_phrase) << '\t' << stats[i].occurrences << '\t'
        << stats[i].tgt_variant_count << '\t' << stats[i].src_only_count << '\t'
        << stats[i].tgt_only_count << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace dictmt
