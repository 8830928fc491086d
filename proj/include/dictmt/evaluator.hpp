#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dictmt/corpus.hpp"
#include "dictmt/dictionary.hpp"
#include "dictmt/matcher.hpp"
#include "dictmt/splitter.hpp"

namespace dictmt {

// One scorable unit: a dictionary entry matched (both sides) in a test
// sentence, with the reference's inflected target phrase.
struct EvalItem {
  int sentence_id = -1;
  int entry_id = -1;
  std::vector<std::string> ref_tgt_surface;
  std::vector<std::string> dict_tgt_lemma;
  ShotClass shot_class = ShotClass::OneShot;
};

struct SubsetScore {
  std::int64_t hits = 0;
  std::int64_t total = 0;
  double accuracy() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(total); }
};

struct MetricScores {
  SubsetScore all, one_shot, few_shot;
};

struct EvalReport {
  MetricScores exact, lemma, morph_adj;
  double bleu = 0.0;
  std::int64_t item_count = 0;
  std::int64_t morph_item_count = 0;
  std::int64_t sentence_count = 0;
  std::string lemma_source = "identity";  // "file", "table", or "identity"
  // Reserved for externally computed characTER values; never filled here.
  std::optional<double> character_score;
};

// Items for every (test sentence, both-sides matched entry) whose entry sits
// in the Test or Mix set. Test sentences without any such match are skipped
// (a warning is emitted when `warnings` is non-null).
std::vector<EvalItem> build_eval_items(const SplitManifest& manifest,
                                       std::span<const MatchRecord> matches,
                                       std::span<const DictEntry> entries,
                                       std::vector<std::string>* warnings = nullptr);

// Reference phrase appears verbatim (case-sensitive) in the hypothesis.
bool exact_match(std::span<const std::string> hyp_tokens, const EvalItem& item);

// Dictionary target lemma appears (case-folded) in the lemmatized hypothesis.
bool lemma_match(std::span<const std::string> hyp_lemmas, const EvalItem& item);

// True when the reference realization differs from the dictionary lemma, so
// producing it requires actual inflection.
bool in_morph_subset(const EvalItem& item);

// Scores hypotheses aligned by line with `test_sentence_ids` (the exported
// test order). `refs` are the test reference token sequences in that order.
EvalReport aggregate(std::span<const EvalItem> items,
                     const std::vector<std::vector<std::string>>& hyp_tokens,
                     const std::vector<std::vector<std::string>>& hyp_lemmas,
                     const std::vector<int>& test_sentence_ids,
                     const std::vector<std::vector<std::string>>& refs);

// Corpus BLEU: geometric mean of modified n-gram precisions times the
// brevity penalty, no smoothing, case-sensitive, scaled to [0, 100]. Orders
// with zero hypothesis n-grams are excluded from the mean so that a corpus
// of very short sentences still scores 100 against itself.
double bleu(const std::vector<std::vector<std::string>>& hyps,
            const std::vector<std::vector<std::string>>& refs, int max_n = 4);

void write_report_json(const EvalReport& report, const std::string& path);

// Plain-text table: metrics as rows, All / OneS / FewS as columns.
std::string format_report_table(const EvalReport& report);

}  // namespace dictmt
