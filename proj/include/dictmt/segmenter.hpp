#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dictmt {

enum class Scheme { Bpe, Chars, Mixed, MixedAnnot };

const char* scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

struct BpeModel {
  std::vector<std::pair<std::string, std::string>> merges;
  std::string continuation_marker = "@@";

  void save(const std::string& path) const;
  static BpeModel load(const std::string& path);
};

// Learns merge rules from word frequencies: repeatedly merge the most
// frequent adjacent symbol pair inside words, ties broken by the
// lexicographically smallest (left, right) pair. Stops after num_merges or
// once no pair occurs at least twice.
BpeModel learn_bpe(const std::unordered_map<std::string, std::int64_t>& word_freq,
                   std::size_t num_merges);

// Applies a learned model. Caches per word type, so reuse one applier for a
// whole corpus.
class BpeApplier {
public:
  explicit BpeApplier(const BpeModel& model);

  std::vector<std::string> apply(std::span<const std::string> tokens);
  const std::vector<std::string>& apply_word(const std::string& word);

  // Every symbol producible by the model: single codepoints seen in merges
  // plus all merge products.
  const std::unordered_set<std::string>& known_symbols() const { return known_symbols_; }

private:
  const BpeModel& model_;
  std::unordered_map<std::string, int> ranks_;
  std::unordered_map<std::string, std::vector<std::string>> cache_;
  std::unordered_set<std::string> known_symbols_;
};

std::vector<std::string> apply_bpe(std::span<const std::string> tokens, const BpeModel& model);

struct MixConfig {
  std::int64_t char_threshold = 50;  // words below this frequency become characters
  const std::unordered_map<std::string, std::int64_t>* freq_table = nullptr;
  std::string word_boundary_marker = "<w>";
  bool annot_all_chars = false;  // additionally split everything inside annotations
  std::string delimiter = "#";   // annotation delimiter, always kept whole
};

// Every word becomes its codepoint sequence; words are separated by the
// boundary marker: [ab, c] -> [a, b, <w>, c].
std::vector<std::string> segment_chars(std::span<const std::string> tokens,
                                       const std::string& word_boundary_marker = "<w>");

// Frequent words stay whole; words below the threshold are split into
// codepoints bracketed by the boundary marker on both sides, which keeps
// desegmentation exact: [the, xq] -> [the, <w>, x, q, <w>].
std::vector<std::string> segment_mixed(std::span<const std::string> tokens,
                                       const MixConfig& config);

// Exact inverse of the named scheme. Strict mode rejects dangling
// continuation markers and unterminated character runs; tolerant mode
// repairs them by concatenation.
std::vector<std::string> desegment(std::span<const std::string> symbols, Scheme scheme,
                                   bool strict = true,
                                   const std::string& continuation_marker = "@@",
                                   const std::string& word_boundary_marker = "<w>");

}  // namespace dictmt
