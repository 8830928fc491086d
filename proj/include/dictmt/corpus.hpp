#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dictmt {

enum class Side { Source, Target };

const char* side_name(Side side);

// One aligned sentence pair. Token and lemma sequences on a side always have
// equal length; lemmas default to the surface forms until a lemma file or
// table is applied.
struct SentencePair {
  int id = 0;
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
  std::vector<std::string> src_lemmas;
  std::vector<std::string> tgt_lemmas;

  const std::vector<std::string>& tokens(Side side) const {
    return side == Side::Source ? src_tokens : tgt_tokens;
  }
  const std::vector<std::string>& lemmas(Side side) const {
    return side == Side::Source ? src_lemmas : tgt_lemmas;
  }
};

// surface -> lemma lookup with identity fallback. Keys are case-folded;
// stored lemma casing is preserved.
class LemmaTable {
public:
  LemmaTable() = default;

  static LemmaTable load(const std::string& path);

  void add(const std::string& surface, const std::string& lemma);
  std::string lookup(const std::string& surface) const;
  std::size_t size() const { return entries_.size(); }

private:
  std::unordered_map<std::string, std::string> entries_;
};

class Corpus {
public:
  // Reads two aligned token files, one sentence per line. Lemmas start out
  // as copies of the surface tokens.
  static Corpus load_parallel(const std::string& src_path, const std::string& tgt_path);

  static Corpus from_pairs(std::vector<SentencePair> pairs);

  // Replaces per-token lemmas on one side. Accepts three layouts: one line
  // of space-separated lemmas per sentence, token<TAB>lemma with blank-line
  // sentence breaks, or CoNLL-U (columns 2 and 3). Idempotent for the same
  // file.
  void apply_lemma_file(Side side, const std::string& lemma_path);

  void apply_lemma_table(Side side, const LemmaTable& table);

  const std::vector<SentencePair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

  const std::unordered_map<std::string, std::int64_t>& word_frequencies(Side side) const {
    return side == Side::Source ? src_freq_ : tgt_freq_;
  }

private:
  void rebuild_frequencies();

  std::vector<SentencePair> pairs_;
  std::unordered_map<std::string, std::int64_t> src_freq_;
  std::unordered_map<std::string, std::int64_t> tgt_freq_;
};

// Element-wise table lookup with identity fallback for unmapped surfaces.
std::vector<std::string> lemmatize_fallback(std::span<const std::string> tokens,
                                            const LemmaTable& table);

}  // namespace dictmt
