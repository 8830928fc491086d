#pragma once

#include <span>
#include <string>
#include <vector>

#include "dictmt/corpus.hpp"
#include "dictmt/dictionary.hpp"
#include "dictmt/matcher.hpp"
#include "dictmt/splitter.hpp"

namespace dictmt {

struct AnnotationConfig {
  std::string delimiter = "#";
  // When set, in-text delimiter tokens are replaced by escape_token before
  // annotating instead of raising an error.
  bool escape = false;
  std::string escape_token = "<hash>";
  bool annotate_extra = false;
};

// Enforces the delimiter-collision policy on a plain sentence: an in-text
// delimiter token is an error, or is replaced by escape_token when escape
// mode is on.
std::vector<std::string> apply_delimiter_policy(std::span<const std::string> tokens,
                                                const AnnotationConfig& config,
                                                int sentence_id);

// Wraps every matched source span as `delim w1..wn delim t1..tm delim`,
// keeping the inflected source surface and inserting the target lemma
// phrase. Matches must belong to this sentence, carry a source span, and be
// non-overlapping.
std::vector<std::string> annotate_tokens(std::span<const std::string> tokens, int sentence_id,
                                         std::span<const MatchRecord> matches,
                                         const EntryIndex& entries,
                                         const AnnotationConfig& config);

std::vector<std::string> annotate_sentence(const SentencePair& pair,
                                           std::span<const MatchRecord> matches,
                                           const EntryIndex& entries,
                                           const AnnotationConfig& config);

struct StrippedAnnotation {
  std::size_t src_start = 0;  // position in the stripped sentence
  std::vector<std::string> src_surface;
  std::vector<std::string> tgt_lemma;
};

struct StripResult {
  std::vector<std::string> tokens;
  std::vector<StrippedAnnotation> annotations;
};

// Inverse of annotate_sentence: recovers the plain sentence and the
// (source surface, target lemma) pairs. Delimiters must balance in triples.
StripResult strip_annotation(std::span<const std::string> tokens,
                             const AnnotationConfig& config);

// Match records for frequent entries: those clearing the variant and
// conflict thresholds with occurrences above max_occ, restricted to
// Train-fated sentences and to both-sides matches.
std::vector<MatchRecord> build_extra_annotations(const Corpus& corpus,
                                                 std::span<const DictEntry> full_dictionary,
                                                 std::span<const EntryStats> stats,
                                                 const FilterThresholds& thresholds,
                                                 const SplitManifest& manifest);

}  // namespace dictmt
