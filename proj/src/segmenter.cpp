#include "dictmt/segmenter.hpp"

#include <algorithm>
#include <climits>
#include <fstream>
#include <queue>

#include "dictmt/error.hpp"
#include "dictmt/text.hpp"

namespace dictmt {

namespace {

// Unambiguous hash key for a symbol pair (symbols may contain any byte).
std::string pair_key(const std::string& left, const std::string& right) {
  return std::to_string(left.size()) + ':' + left + right;
}

struct LearnState {
  std::vector<std::string> symbol_text;             // symbol id -> text
  std::unordered_map<std::string, std::uint32_t> symbol_ids;

  std::uint32_t intern(const std::string& text) {
    auto [it, inserted] = symbol_ids.emplace(text, symbol_text.size());
    if (inserted) symbol_text.push_back(text);
    return it->second;
  }
};

std::uint64_t pack(std::uint32_t left, std::uint32_t right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}

}  // namespace

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Bpe: return "bpe";
    case Scheme::Chars: return "chars";
    case Scheme::Mixed: return "mixed";
    case Scheme::MixedAnnot: return "mixed-annot";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "bpe") return Scheme::Bpe;
  if (name == "chars") return Scheme::Chars;
  if (name == "mixed") return Scheme::Mixed;
  if (name == "mixed-annot") return Scheme::MixedAnnot;
  throw DataError("unknown segmentation scheme: " + name);
}

void BpeModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write BPE model: " + path);
  for (const auto& [left, right] : merges) out << left << ' ' << right << '\n';
  if (!out) throw IoError("write failed: " + path);
}

BpeModel BpeModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open BPE model: " + path);
  BpeModel model;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 >= line.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 'left right'");
    model.merges.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  return model;
}

BpeModel learn_bpe(const std::unordered_map<std::string, std::int64_t>& word_freq,
                   std::size_t num_merges) {
  LearnState state;

  struct Word {
    std::vector<std::uint32_t> symbols;
    std::int64_t count;
  };
  std::vector<Word> words;
  words.reserve(word_freq.size());
  // Sorted ingestion so symbol ids (and therefore nothing observable) depend
  // on hash iteration order.
  std::vector<const std::string*> vocab;
  vocab.reserve(word_freq.size());
  for (const auto& [word, count] : word_freq) vocab.push_back(&word);
  std::sort(vocab.begin(), vocab.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });

  std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> pair_words;  // superset index

  auto add_word_pairs = [&](std::uint32_t word_index, std::int64_t sign) {
    const Word& word = words[word_index];
    for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
      std::uint64_t key = pack(word.symbols[i], word.symbols[i + 1]);
      pair_counts[key] += sign * word.count;
      if (sign > 0) {
        auto& list = pair_words[key];
        if (list.empty() || list.back() != word_index) list.push_back(word_index);
      }
    }
  };

  for (const std::string* word : vocab) {
    Word w;
    for (const std::string& cp : utf8_split(*word)) w.symbols.push_back(state.intern(cp));
    w.count = word_freq.at(*word);
    if (w.symbols.size() < 2 || w.count <= 0) continue;
    words.push_back(std::move(w));
    add_word_pairs(static_cast<std::uint32_t>(words.size() - 1), +1);
  }

  // Max-heap with lazy invalidation: entries are revalidated against
  // pair_counts when popped. Ties prefer the lexicographically smaller
  // (left, right) symbol text.
  struct HeapEntry {
    std::int64_t count;
    std::uint32_t left, right;
  };
  auto heap_less = [&state](const HeapEntry& a, const HeapEntry& b) {
    if (a.count != b.count) return a.count < b.count;
    const std::string& al = state.symbol_text[a.left];
    const std::string& bl = state.symbol_text[b.left];
    if (al != bl) return al > bl;
    return state.symbol_text[a.right] > state.symbol_text[b.right];
  };
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(heap_less)> heap(heap_less);
  for (const auto& [key, count] : pair_counts)
    heap.push({count, static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key)});

  BpeModel model;
  while (model.merges.size() < num_merges && !heap.empty()) {
    HeapEntry top = heap.top();
    heap.pop();
    std::uint64_t key = pack(top.left, top.right);
    auto it = pair_counts.find(key);
    if (it == pair_counts.end() || it->second != top.count) continue;  // stale
    if (top.count < 2) break;

    const std::string merged_text = state.symbol_text[top.left] + state.symbol_text[top.right];
    std::uint32_t merged = state.intern(merged_text);
    model.merges.emplace_back(state.symbol_text[top.left], state.symbol_text[top.right]);

    std::vector<std::uint32_t> affected = std::move(pair_words[key]);
    pair_words.erase(key);
    std::vector<std::uint64_t> touched;
    for (std::uint32_t word_index : affected) {
      Word& word = words[word_index];
      bool present = false;
      for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
        if (word.symbols[i] == top.left && word.symbols[i + 1] == top.right) {
          present = true;
          break;
        }
      }
      if (!present) continue;  // stale index entry

      // Retract the word's pair counts, rewrite it, then re-add.
      for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
        std::uint64_t k = pack(word.symbols[i], word.symbols[i + 1]);
        pair_counts[k] -= word.count;
        touched.push_back(k);
      }
      std::vector<std::uint32_t> rewritten;
      rewritten.reserve(word.symbols.size());
      std::size_t i = 0;
      while (i < word.symbols.size()) {
        if (i + 1 < word.symbols.size() && word.symbols[i] == top.left &&
            word.symbols[i + 1] == top.right) {
          rewritten.push_back(merged);
          i += 2;
        } else {
          rewritten.push_back(word.symbols[i]);
          ++i;
        }
      }
      word.symbols = std::move(rewritten);
      for (std::size_t j = 0; j + 1 < word.symbols.size(); ++j) {
        std::uint64_t k = pack(word.symbols[j], word.symbols[j + 1]);
        pair_counts[k] += word.count;
        auto& list = pair_words[k];
        if (list.empty() || list.back() != word_index) list.push_back(word_index);
        touched.push_back(k);
      }
    }

    pair_counts.erase(key);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (std::uint64_t k : touched) {
      auto tc = pair_counts.find(k);
      if (tc == pair_counts.end()) continue;
      if (tc->second <= 0) {
        pair_counts.erase(tc);
        pair_words.erase(k);
        continue;
      }
      heap.push({tc->second, static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k)});
    }
  }
  return model;
}

BpeApplier::BpeApplier(const BpeModel& model) : model_(model) {
  for (std::size_t i = 0; i < model.merges.size(); ++i) {
    const auto& [left, right] = model.merges[i];
    ranks_.emplace(pair_key(left, right), static_cast<int>(i));
    known_symbols_.insert(left);
    known_symbols_.insert(right);
    known_symbols_.insert(left + right);
  }
}

const std::vector<std::string>& BpeApplier::apply_word(const std::string& word) {
  auto cached = cache_.find(word);
  if (cached != cache_.end()) return cached->second;

  if (word.find(model_.continuation_marker) != std::string::npos)
    throw DataError("cannot BPE-segment a token containing the continuation marker: " + word);

  std::vector<std::string> pieces = utf8_split(word);
  while (pieces.size() > 1) {
    int best_rank = INT_MAX;
    std::size_t best_pos = 0;
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
      auto it = ranks_.find(pair_key(pieces[i], pieces[i + 1]));
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best_pos = i;
      }
    }
    if (best_rank == INT_MAX) break;
    // Merge every occurrence of the winning pair, left to right.
    const std::string left = pieces[best_pos];
    const std::string right = pieces[best_pos + 1];
    std::vector<std::string> next;
    next.reserve(pieces.size());
    std::size_t i = 0;
    while (i < pieces.size()) {
      if (i + 1 < pieces.size() && pieces[i] == left && pieces[i + 1] == right) {
        next.push_back(left + right);
        i += 2;
      } else {
        next.push_back(std::move(pieces[i]));
        ++i;
      }
    }
    pieces = std::move(next);
  }

  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) pieces[i] += model_.continuation_marker;
  return cache_.emplace(word, std::move(pieces)).first->second;
}

std::vector<std::string> BpeApplier::apply(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  for (const std::string& token : tokens) {
    const std::vector<std::string>& pieces = apply_word(token);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

std::vector<std::string> apply_bpe(std::span<const std::string> tokens, const BpeModel& model) {
  BpeApplier applier(model);
  return applier.apply(tokens);
}

std::vector<std::string> segment_chars(std::span<const std::string> tokens,
                                       const std::string& word_boundary_marker) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == word_boundary_marker)
      throw DataError("token equals the word boundary marker: " + tokens[i]);
    if (i > 0) out.push_back(word_boundary_marker);
    for (std::string& cp : utf8_split(tokens[i])) out.push_back(std::move(cp));
  }
  return out;
}

std::vector<std::string> segment_mixed(std::span<const std::string> tokens,
                                       const MixConfig& config) {
  if (config.freq_table == nullptr) throw DataError("segment_mixed: missing frequency table");
  if (config.char_threshold < 0)
    throw DataError("segment_mixed: character threshold must be non-negative");
  std::vector<std::string> out;
  int delimiter_phase = 0;  // annotations are delimiter triples; 1 and 2 are inside
  for (const std::string& token : tokens) {
    if (token == config.word_boundary_marker)
      throw DataError("token equals the word boundary marker: " + token);
    if (!config.delimiter.empty() && token == config.delimiter) {
      out.push_back(token);
      delimiter_phase = (delimiter_phase + 1) % 3;
      continue;
    }
    bool inside_annotation = delimiter_phase != 0;
    bool split;
    if (config.annot_all_chars && inside_annotation) {
      split = true;
    } else {
      auto it = config.freq_table->find(token);
      std::int64_t freq = it == config.freq_table->end() ? 0 : it->second;
      split = freq < config.char_threshold;
    }
    if (!split) {
      out.push_back(token);
      continue;
    }
    out.push_back(config.word_boundary_marker);
    for (std::string& cp : utf8_split(token)) out.push_back(std::move(cp));
    out.push_back(config.word_boundary_marker);
  }
  return out;
}

namespace {

std::vector<std::string> desegment_bpe(std::span<const std::string> symbols, bool strict,
                                       const std::string& marker) {
  std::vector<std::string> out;
  std::string pending;
  for (const std::string& symbol : symbols) {
    if (symbol.size() > marker.size() && symbol.ends_with(marker)) {
      pending += symbol.substr(0, symbol.size() - marker.size());
    } else {
      pending += symbol;
      out.push_back(std::move(pending));
      pending.clear();
    }
  }
  if (!pending.empty()) {
    if (strict) throw DataError("dangling continuation marker at end of sequence");
    out.push_back(std::move(pending));
  }
  return out;
}

std::vector<std::string> desegment_chars(std::span<const std::string> symbols, bool strict,
                                         const std::string& marker) {
  std::vector<std::string> out;
  std::string word;
  bool any = false;
  for (const std::string& symbol : symbols) {
    if (symbol == marker) {
      if (word.empty() && strict)
        throw DataError("empty word before boundary marker");
      if (!word.empty()) out.push_back(std::move(word));
      word.clear();
      any = true;
      continue;
    }
    word += symbol;
  }
  if (!word.empty())
    out.push_back(std::move(word));
  else if (any && strict && !symbols.empty())
    throw DataError("trailing word boundary marker");
  return out;
}

std::vector<std::string> desegment_mixed(std::span<const std::string> symbols, bool strict,
                                         const std::string& marker) {
  std::vector<std::string> out;
  std::string word;
  bool in_run = false;
  for (const std::string& symbol : symbols) {
    if (symbol == marker) {
      if (in_run) {
        if (word.empty() && strict) throw DataError("empty character run");
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
      }
      in_run = !in_run;
      continue;
    }
    if (in_run)
      word += symbol;
    else
      out.push_back(symbol);
  }
  if (in_run) {
    if (strict) throw DataError("unterminated character run at end of sequence");
    if (!word.empty()) out.push_back(std::move(word));
  }
  return out;
}

}  // namespace

std::vector<std::string> desegment(std::span<const std::string> symbols, Scheme scheme,
                                   bool strict, const std::string& continuation_marker,
                                   const std::string& word_boundary_marker) {
  switch (scheme) {
    case Scheme::Bpe: return desegment_bpe(symbols, strict, continuation_marker);
    case Scheme::Chars: return desegment_chars(symbols, strict, word_boundary_marker);
    case Scheme::Mixed:
    case Scheme::MixedAnnot: return desegment_mixed(symbols, strict, word_boundary_marker);
  }
  throw DataError("unknown scheme");
}

}  // namespace dictmt
