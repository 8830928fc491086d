#include "dictmt/matcher.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <unordered_map>

#include <json.hpp>

#include "dictmt/error.hpp"
#include "dictmt/text.hpp"

namespace dictmt {

namespace {

constexpr std::uint32_t kUnknownSymbol = UINT32_MAX;

// Interns case-folded lemmas. Only lemmas that occur in some pattern get an
// id; everything else maps to kUnknownSymbol, which no pattern contains.
class SymbolTable {
public:
  std::uint32_t intern(const std::string& lemma) {
    std::string folded = fold_case(lemma);
    auto [it, inserted] = ids_.emplace(std::move(folded), next_);
    if (inserted) ++next_;
    return it->second;
  }

  std::uint32_t lookup(const std::string& lemma) const {
    auto it = ids_.find(fold_case(lemma));
    return it == ids_.end() ? kUnknownSymbol : it->second;
  }

private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::uint32_t next_ = 0;
};

// Aho-Corasick over lemma-id sequences. Patterns are deduplicated; each
// carries the list of entry ids that share the phrase.
class PhraseAutomaton {
public:
  void add_pattern(const std::vector<std::uint32_t>& symbols, int entry_id) {
    auto [it, inserted] = pattern_ids_.emplace(symbols, patterns_.size());
    if (inserted) patterns_.push_back({symbols.size(), {}});
    patterns_[it->second].entry_ids.push_back(entry_id);
    if (inserted) insert_into_trie(symbols, it->second);
  }

  void build() {
    std::queue<int> queue;
    for (auto& [sym, child] : nodes_[0].next) {
      nodes_[child].fail = 0;
      nodes_[child].out_link = nodes_[child].pattern < 0 ? -1 : child;
      queue.push(child);
    }
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop();
      for (auto& [sym, child] : nodes_[node].next) {
        int fail = nodes_[node].fail;
        while (fail != 0 && !nodes_[fail].next.count(sym)) fail = nodes_[fail].fail;
        auto it = nodes_[fail].next.find(sym);
        int target = (it != nodes_[fail].next.end() && it->second != child) ? it->second : 0;
        nodes_[child].fail = target;
        nodes_[child].out_link =
            nodes_[child].pattern >= 0
                ? child
                : (target >= 0 ? nodes_[target].out_link : -1);
        queue.push(child);
      }
    }
  }

  // Calls fn(pattern_index, start) for every occurrence.
  template <typename Fn>
  void scan(std::span<const std::uint32_t> sequence, Fn&& fn) const {
    int state = 0;
    for (std::size_t pos = 0; pos < sequence.size(); ++pos) {
      std::uint32_t sym = sequence[pos];
      if (sym == kUnknownSymbol) {
        state = 0;
        continue;
      }
      while (true) {
        auto it = nodes_[state].next.find(sym);
        if (it != nodes_[state].next.end()) {
          state = it->second;
          break;
        }
        if (state == 0) break;
        state = nodes_[state].fail;
      }
      for (int hit = nodes_[state].out_link; hit > 0; hit = nodes_[nodes_[hit].fail].out_link) {
        int p = nodes_[hit].pattern;
        fn(p, pos + 1 - patterns_[static_cast<std::size_t>(p)].length);
      }
    }
  }

  const std::vector<int>& entry_ids(int pattern_index) const {
    return patterns_[static_cast<std::size_t>(pattern_index)].entry_ids;
  }

  std::size_t pattern_length(int pattern_index) const {
    return patterns_[static_cast<std::size_t>(pattern_index)].length;
  }

  std::size_t pattern_count() const { return patterns_.size(); }

private:
  struct Node {
    std::unordered_map<std::uint32_t, int> next;
    int fail = 0;
    int out_link = -1;  // deepest node on the fail chain (incl. self) with a pattern
    int pattern = -1;
  };

  struct Pattern {
    std::size_t length;
    std::vector<int> entry_ids;
  };

  void insert_into_trie(const std::vector<std::uint32_t>& symbols, std::size_t pattern_index) {
    int node = 0;
    for (std::uint32_t sym : symbols) {
      auto it = nodes_[node].next.find(sym);
      if (it == nodes_[node].next.end()) {
        nodes_.push_back({});
        it = nodes_[node].next.emplace(sym, static_cast<int>(nodes_.size() - 1)).first;
      }
      node = it->second;
    }
    nodes_[node].pattern = static_cast<int>(pattern_index);
  }

  std::vector<Node> nodes_{1};
  std::map<std::vector<std::uint32_t>, std::size_t> pattern_ids_;
  std::vector<Pattern> patterns_;
};

std::vector<std::uint32_t> fold_sequence(std::span<const std::string> lemmas,
                                         const SymbolTable& symbols) {
  std::vector<std::uint32_t> out;
  out.reserve(lemmas.size());
  for (const std::string& lemma : lemmas) out.push_back(symbols.lookup(lemma));
  return out;
}

nlohmann::ordered_json span_to_json(const std::optional<Span>& span) {
  if (!span) return nullptr;
  return nlohmann::ordered_json::array({span->start, span->length});
}

std::optional<Span> span_from_json(const nlohmann::json& value) {
  if (value.is_null()) return std::nullopt;
  if (!value.is_array() || value.size() != 2) throw DataError("malformed span in match record");
  return Span{value[0].get<std::size_t>(), value[1].get<std::size_t>()};
}

}  // namespace

std::vector<Span> match_side(std::span<const std::string> lemmas,
                             std::span<const std::string> phrase) {
  std::vector<Span> spans;
  if (phrase.empty() || phrase.size() > lemmas.size()) return spans;
  std::vector<std::string> folded_phrase;
  folded_phrase.reserve(phrase.size());
  for (const std::string& p : phrase) folded_phrase.push_back(fold_case(p));
  std::vector<std::string> folded;
  folded.reserve(lemmas.size());
  for (const std::string& l : lemmas) folded.push_back(fold_case(l));

  for (std::size_t i = 0; i + phrase.size() <= lemmas.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < phrase.size(); ++j) {
      if (folded[i + j] != folded_phrase[j]) {
        ok = false;
        break;
      }
    }
    if (ok) spans.push_back({i, phrase.size()});
  }
  return spans;
}

std::vector<MatchRecord> find_matches(const Corpus& corpus, std::span<const DictEntry> entries) {
  SymbolTable symbols;
  PhraseAutomaton src_automaton, tgt_automaton;
  for (const DictEntry& entry : entries) {
    std::vector<std::uint32_t> src_syms, tgt_syms;
    for (const std::string& lemma : entry.src_lemma_phrase)
      src_syms.push_back(symbols.intern(lemma));
    for (const std::string& lemma : entry.tgt_lemma_phrase)
      tgt_syms.push_back(symbols.intern(lemma));
    src_automaton.add_pattern(src_syms, entry.id);
    tgt_automaton.add_pattern(tgt_syms, entry.id);
  }
  src_automaton.build();
  tgt_automaton.build();

  std::vector<MatchRecord> records;
  // entry id -> leftmost span per side, reset per sentence.
  std::unordered_map<int, Span> src_hits, tgt_hits;
  for (const SentencePair& pair : corpus.pairs()) {
    src_hits.clear();
    tgt_hits.clear();

    std::vector<std::uint32_t> src_seq = fold_sequence(pair.src_lemmas, symbols);
    src_automaton.scan(src_seq, [&](int pattern, std::size_t start) {
      for (int entry_id : src_automaton.entry_ids(pattern)) {
        auto [it, inserted] =
            src_hits.emplace(entry_id, Span{start, src_automaton.pattern_length(pattern)});
        if (!inserted && start < it->second.start)
          it->second = {start, src_automaton.pattern_length(pattern)};
      }
    });
    std::vector<std::uint32_t> tgt_seq = fold_sequence(pair.tgt_lemmas, symbols);
    tgt_automaton.scan(tgt_seq, [&](int pattern, std::size_t start) {
      for (int entry_id : tgt_automaton.entry_ids(pattern)) {
        auto [it, inserted] =
            tgt_hits.emplace(entry_id, Span{start, tgt_automaton.pattern_length(pattern)});
        if (!inserted && start < it->second.start)
          it->second = {start, tgt_automaton.pattern_length(pattern)};
      }
    });
    if (src_hits.empty() && tgt_hits.empty()) continue;

    for (const DictEntry& entry : entries) {
      auto src_it = src_hits.find(entry.id);
      auto tgt_it = tgt_hits.find(entry.id);
      if (src_it == src_hits.end() && tgt_it == tgt_hits.end()) continue;
      MatchRecord record;
      record.sentence_id = pair.id;
      record.entry_id = entry.id;
      if (src_it != src_hits.end()) {
        record.src_span = src_it->second;
        record.src_surface.assign(pair.src_tokens.begin() + record.src_span->start,
                                  pair.src_tokens.begin() + record.src_span->end());
      }
      if (tgt_it != tgt_hits.end()) {
        record.tgt_span = tgt_it->second;
        record.tgt_surface.assign(pair.tgt_tokens.begin() + record.tgt_span->start,
                                  pair.tgt_tokens.begin() + record.tgt_span->end());
      }
      records.push_back(std::move(record));
    }
  }

  std::sort(records.begin(), records.end(), [](const MatchRecord& a, const MatchRecord& b) {
    if (a.sentence_id != b.sentence_id) return a.sentence_id < b.sentence_id;
    std::size_t sa = a.src_span ? a.src_span->start : SIZE_MAX;
    std::size_t sb = b.src_span ? b.src_span->start : SIZE_MAX;
    if (sa != sb) return sa < sb;
    return a.entry_id < b.entry_id;
  });
  return records;
}

std::vector<MatchRecord> select_annotation_matches(std::span<const MatchRecord> records) {
  std::vector<const MatchRecord*> candidates;
  for (const MatchRecord& record : records)
    if (record.src_span) candidates.push_back(&record);

  std::sort(candidates.begin(), candidates.end(), [](const MatchRecord* a, const MatchRecord* b) {
    if (a->src_span->length != b->src_span->length)
      return a->src_span->length > b->src_span->length;
    if (a->entry_id != b->entry_id) return a->entry_id < b->entry_id;
    return a->src_span->start < b->src_span->start;
  });

  std::vector<MatchRecord> selected;
  for (const MatchRecord* candidate : candidates) {
    bool clashes = false;
    for (const MatchRecord& kept : selected) {
      if (candidate->src_span->overlaps(*kept.src_span)) {
        clashes = true;
        break;
      }
    }
    if (!clashes) selected.push_back(*candidate);
  }
  std::sort(selected.begin(), selected.end(), [](const MatchRecord& a, const MatchRecord& b) {
    return a.src_span->start < b.src_span->start;
  });
  return selected;
}

void write_matches_jsonl(std::span<const MatchRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write matches: " + path);
  for (const MatchRecord& record : records) {
    nlohmann::ordered_json line;
    line["sentence_id"] = record.sentence_id;
    line["entry_id"] = record.entry_id;
    line["src_span"] = span_to_json(record.src_span);
    line["tgt_span"] = span_to_json(record.tgt_span);
    line["src_surface"] = record.src_surface;
    line["tgt_surface"] = record.tgt_surface;
    out << line.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<MatchRecord> read_matches_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open matches: " + path);
  std::vector<MatchRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json value = nlohmann::json::parse(line, nullptr, false);
    if (value.is_discarded())
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed match record");
    MatchRecord record;
    record.sentence_id = value.at("sentence_id").get<int>();
    record.entry_id = value.at("entry_id").get<int>();
    record.src_span = span_from_json(value.at("src_span"));
    record.tgt_span = span_from_json(value.at("tgt_span"));
    record.src_surface = value.at("src_surface").get<std::vector<std::string>>();
    record.tgt_surface = value.at("tgt_surface").get<std::vector<std::string>>();
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace dictmt
