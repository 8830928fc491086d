#include "dictmt/annotator.hpp"

#include <algorithm>

#include "dictmt/error.hpp"
#include "dictmt/text.hpp"

namespace dictmt {

std::vector<std::string> apply_delimiter_policy(std::span<const std::string> tokens,
                                                const AnnotationConfig& config,
                                                int sentence_id) {
  if (config.delimiter.empty() || contains_whitespace(config.delimiter))
    throw DataError("annotation delimiter must be a single whitespace-free token");
  std::vector<std::string> out(tokens.begin(), tokens.end());
  for (std::string& token : out) {
    if (token == config.delimiter) {
      if (!config.escape)
        throw DataError("sentence " + std::to_string(sentence_id) +
                        " already contains the delimiter token '" + config.delimiter + "'");
      token = config.escape_token;
    }
  }
  return out;
}

std::vector<std::string> annotate_tokens(std::span<const std::string> tokens, int sentence_id,
                                         std::span<const MatchRecord> matches,
                                         const EntryIndex& entries,
                                         const AnnotationConfig& config) {
  std::vector<const MatchRecord*> ordered;
  for (const MatchRecord& match : matches) {
    if (match.sentence_id != sentence_id)
      throw DataError("annotate: match for sentence " + std::to_string(match.sentence_id) +
                      " applied to sentence " + std::to_string(sentence_id));
    if (!match.src_span) throw DataError("annotate: match without source span");
    if (match.src_span->end() > tokens.size())
      throw DataError("annotate: source span out of bounds");
    ordered.push_back(&match);
  }
  std::sort(ordered.begin(), ordered.end(), [](const MatchRecord* a, const MatchRecord* b) {
    return a->src_span->start < b->src_span->start;
  });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->src_span->start < ordered[i - 1]->src_span->end())
      throw DataError("annotate: overlapping matches at sentence " +
                      std::to_string(sentence_id));
  }

  std::vector<std::string> source = apply_delimiter_policy(tokens, config, sentence_id);

  std::vector<std::string> out;
  out.reserve(source.size() + ordered.size() * 4);
  std::size_t next = 0;
  std::size_t pos = 0;
  while (pos < source.size()) {
    if (next < ordered.size() && ordered[next]->src_span->start == pos) {
      const MatchRecord& match = *ordered[next];
      const DictEntry& entry = entries.by_id(match.entry_id);
      out.push_back(config.delimiter);
      for (std::size_t i = 0; i < match.src_span->length; ++i) out.push_back(source[pos + i]);
      out.push_back(config.delimiter);
      for (const std::string& lemma : entry.tgt_lemma_phrase) out.push_back(lemma);
      out.push_back(config.delimiter);
      pos += match.src_span->length;
      ++next;
    } else {
      out.push_back(source[pos]);
      ++pos;
    }
  }
  return out;
}

std::vector<std::string> annotate_sentence(const SentencePair& pair,
                                           std::span<const MatchRecord> matches,
                                           const EntryIndex& entries,
                                           const AnnotationConfig& config) {
  return annotate_tokens(pair.src_tokens, pair.id, matches, entries, config);
}

StripResult strip_annotation(std::span<const std::string> tokens,
                             const AnnotationConfig& config) {
  StripResult result;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (tokens[i] != config.delimiter) {
      result.tokens.push_back(tokens[i]);
      ++i;
      continue;
    }
    StrippedAnnotation annotation;
    annotation.src_start = result.tokens.size();
    std::size_t j = i + 1;
    while (j < tokens.size() && tokens[j] != config.delimiter) {
      annotation.src_surface.push_back(tokens[j]);
      ++j;
    }
    if (j >= tokens.size() || annotation.src_surface.empty())
      throw DataError("strip_annotation: unbalanced delimiter at token " + std::to_string(i));
    std::size_t k = j + 1;
    while (k < tokens.size() && tokens[k] != config.delimiter) {
      annotation.tgt_lemma.push_back(tokens[k]);
      ++k;
    }
    if (k >= tokens.size() || annotation.tgt_lemma.empty())
      throw DataError("strip_annotation: unbalanced delimiter at token " + std::to_string(j));
    for (const std::string& token : annotation.src_surface) result.tokens.push_back(token);
    result.annotations.push_back(std::move(annotation));
    i = k + 1;
  }
  return result;
}

std::vector<MatchRecord> build_extra_annotations(const Corpus& corpus,
                                                 std::span<const DictEntry> full_dictionary,
                                                 std::span<const EntryStats> stats,
                                                 const FilterThresholds& thresholds,
                                                 const SplitManifest& manifest) {
  if (full_dictionary.size() != stats.size())
    throw DataError("build_extra_annotations: entries and stats have different sizes");

  std::vector<DictEntry> extra;
  for (std::size_t i = 0; i < full_dictionary.size(); ++i) {
    const EntryStats& s = stats[i];
    if (s.occurrences > thresholds.max_occ && s.tgt_variant_count >= thresholds.min_tgt_variants &&
        s.src_only_count < thresholds.max_conflicts && s.tgt_only_count < thresholds.max_conflicts)
      extra.push_back(full_dictionary[i]);
  }

  std::vector<MatchRecord> records;
  for (MatchRecord& record : find_matches(corpus, extra)) {
    if (!record.src_span || !record.tgt_span) continue;
    std::size_t sid = static_cast<std::size_t>(record.sentence_id);
    if (sid < manifest.sentence_fate.size() && manifest.sentence_fate[sid] == Fate::Train)
      records.push_back(std::move(record));
  }
  return records;
}

}  // namespace dictmt
