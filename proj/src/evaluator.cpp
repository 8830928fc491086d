#include "dictmt/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "dictmt/error.hpp"
#include "dictmt/text.hpp"

namespace dictmt {

namespace {

std::vector<std::string> fold_all(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(fold_case(t));
  return out;
}

void tally(MetricScores& metric, ShotClass shot, bool hit) {
  ++metric.all.total;
  if (hit) ++metric.all.hits;
  SubsetScore& subset = shot == ShotClass::OneShot ? metric.one_shot : metric.few_shot;
  ++subset.total;
  if (hit) ++subset.hits;
}

nlohmann::ordered_json subset_json(const SubsetScore& score) {
  return {{"hits", score.hits}, {"total", score.total}, {"accuracy", score.accuracy()}};
}

nlohmann::ordered_json metric_json(const MetricScores& metric) {
  return {{"all", subset_json(metric.all)},
          {"one_shot", subset_json(metric.one_shot)},
          {"few_shot", subset_json(metric.few_shot)}};
}

}  // namespace

std::vector<EvalItem> build_eval_items(const SplitManifest& manifest,
                                       std::span<const MatchRecord> matches,
                                       std::span<const DictEntry> entries,
                                       std::vector<std::string>* warnings) {
  EntryIndex index(entries);
  std::vector<EvalItem> items;
  std::vector<char> sentence_has_item(manifest.sentence_fate.size(), 0);

  for (const MatchRecord& record : matches) {
    std::size_t sid = static_cast<std::size_t>(record.sentence_id);
    if (sid >= manifest.sentence_fate.size()) continue;
    if (manifest.sentence_fate[sid] != Fate::Test) continue;
    if (!record.src_span || !record.tgt_span) continue;
    EntrySet set = manifest.partition.set_of(record.entry_id);
    if (set == EntrySet::Train) continue;

    EvalItem item;
    item.sentence_id = record.sentence_id;
    item.entry_id = record.entry_id;
    item.ref_tgt_surface = record.tgt_surface;
    item.dict_tgt_lemma = index.by_id(record.entry_id).tgt_lemma_phrase;
    item.shot_class = set == EntrySet::Test ? ShotClass::OneShot : ShotClass::FewShot;
    items.push_back(std::move(item));
    sentence_has_item[sid] = 1;
  }

  if (warnings != nullptr) {
    for (std::size_t sid = 0; sid < manifest.sentence_fate.size(); ++sid) {
      if (manifest.sentence_fate[sid] == Fate::Test && !sentence_has_item[sid])
        warnings->push_back("test sentence " + std::to_string(sid) +
                            " has no scorable entry match; excluded from accuracy metrics");
    }
  }
  return items;
}

bool exact_match(std::span<const std::string> hyp_tokens, const EvalItem& item) {
  return contains_subsequence(hyp_tokens, item.ref_tgt_surface);
}

bool lemma_match(std::span<const std::string> hyp_lemmas, const EvalItem& item) {
  std::vector<std::string> folded_hyp = fold_all(hyp_lemmas);
  std::vector<std::string> folded_phrase = fold_all(item.dict_tgt_lemma);
  return contains_subsequence(folded_hyp, folded_phrase);
}

bool in_morph_subset(const EvalItem& item) {
  return join(item.dict_tgt_lemma) != join(item.ref_tgt_surface);
}

EvalReport aggregate(std::span<const EvalItem> items,
                     const std::vector<std::vector<std::string>>& hyp_tokens,
                     const std::vector<std::vector<std::string>>& hyp_lemmas,
                     const std::vector<int>& test_sentence_ids,
                     const std::vector<std::vector<std::string>>& refs) {
  if (hyp_tokens.size() != test_sentence_ids.size()) {
    std::ostringstream msg;
    msg << "hypothesis/test line count mismatch: " << hyp_tokens.size() << " hypotheses for "
        << test_sentence_ids.size() << " test sentences";
    throw DataError(msg.str());
  }
  if (hyp_lemmas.size() != hyp_tokens.size())
    throw DataError("hypothesis lemma count differs from hypothesis count");
  if (refs.size() != hyp_tokens.size())
    throw DataError("reference count differs from hypothesis count");

  std::unordered_map<int, std::size_t> line_of;
  line_of.reserve(test_sentence_ids.size());
  for (std::size_t i = 0; i < test_sentence_ids.size(); ++i)
    line_of.emplace(test_sentence_ids[i], i);

  EvalReport report;
  report.sentence_count = static_cast<std::int64_t>(test_sentence_ids.size());
  for (const EvalItem& item : items) {
    auto it = line_of.find(item.sentence_id);
    if (it == line_of.end())
      throw DataError("eval item references sentence " + std::to_string(item.sentence_id) +
                      " which is not in the test set");
    std::size_t line = it->second;
    bool exact = exact_match(hyp_tokens[line], item);
    bool lemma = lemma_match(hyp_lemmas[line], item);
    tally(report.exact, item.shot_class, exact);
    tally(report.lemma, item.shot_class, lemma);
    if (in_morph_subset(item)) {
      tally(report.morph_adj, item.shot_class, exact);
      ++report.morph_item_count;
    }
    ++report.item_count;
  }
  report.bleu = bleu(hyp_tokens, refs);
  return report;
}

double bleu(const std::vector<std::vector<std::string>>& hyps,
            const std::vector<std::vector<std::string>>& refs, int max_n) {
  if (hyps.size() != refs.size()) {
    std::ostringstream msg;
    msg << "BLEU: hypothesis count " << hyps.size() << " != reference count " << refs.size();
    throw DataError(msg.str());
  }
  if (max_n < 1) throw DataError("BLEU: max_n must be positive");

  std::vector<std::int64_t> correct(static_cast<std::size_t>(max_n), 0);
  std::vector<std::int64_t> total(static_cast<std::size_t>(max_n), 0);
  std::int64_t hyp_len = 0, ref_len = 0;

  std::unordered_map<std::string, std::int64_t> hyp_ngrams, ref_ngrams;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const auto& hyp = hyps[s];
    const auto& ref = refs[s];
    hyp_len += static_cast<std::int64_t>(hyp.size());
    ref_len += static_cast<std::int64_t>(ref.size());
    for (int n = 1; n <= max_n; ++n) {
      std::size_t order = static_cast<std::size_t>(n);
      if (hyp.size() < order) break;
      total[order - 1] += static_cast<std::int64_t>(hyp.size() - order + 1);

      // Tokens never contain spaces, so a space-joined key is unambiguous.
      hyp_ngrams.clear();
      ref_ngrams.clear();
      for (std::size_t i = 0; i + order <= hyp.size(); ++i)
        ++hyp_ngrams[join(std::span(hyp).subspan(i, order))];
      for (std::size_t i = 0; i + order <= ref.size(); ++i)
        ++ref_ngrams[join(std::span(ref).subspan(i, order))];
      for (const auto& [gram, count] : hyp_ngrams) {
        auto it = ref_ngrams.find(gram);
        if (it != ref_ngrams.end()) correct[order - 1] += std::min(count, it->second);
      }
    }
  }

  if (hyp_len == 0) return 0.0;

  double log_precision = 0.0;
  int effective_orders = 0;
  for (int n = 0; n < max_n; ++n) {
    std::size_t i = static_cast<std::size_t>(n);
    if (total[i] == 0) continue;  // no hypothesis n-grams of this order anywhere
    if (correct[i] == 0) return 0.0;
    log_precision += std::log(static_cast<double>(correct[i]) / static_cast<double>(total[i]));
    ++effective_orders;
  }
  if (effective_orders == 0) return 0.0;

  double brevity = 1.0;
  if (hyp_len < ref_len)
    brevity = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return 100.0 * brevity * std::exp(log_precision / effective_orders);
}

void write_report_json(const EvalReport& report, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["exact"] = metric_json(report.exact);
  doc["lemma"] = metric_json(report.lemma);
  doc["morph_adj"] = metric_json(report.morph_adj);
  doc["bleu"] = report.bleu;
  doc["counts"] = {{"items", report.item_count},
                   {"morph_items", report.morph_item_count},
                   {"test_sentences", report.sentence_count}};
  doc["lemma_source"] = report.lemma_source;
  doc["character"] = report.character_score.has_value()
                         ? nlohmann::ordered_json(*report.character_score)
                         : nlohmann::ordered_json(nullptr);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream out;
  auto cell = [](const SubsetScore& s) {
    std::ostringstream c;
    c.setf(std::ios::fixed);
    c.precision(1);
    c << s.accuracy() << " (" << s.hits << '/' << s.total << ')';
    return c.str();
  };
  auto row = [&](const char* name, const MetricScores& m) {
    out << name << '\t' << cell(m.all) << '\t' << cell(m.one_shot) << '\t' << cell(m.few_shot)
        << '\n';
  };
  out << "Metric\tAll\tOneS\tFewS\n";
  row("Exact match", report.exact);
  row("Lemma match", report.lemma);
  row("Morph. Adjustment", report.morph_adj);
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "BLEU\t" << report.bleu << "\n";
  return out.str();
}

}  // namespace dictmt
