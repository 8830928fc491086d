#include "synthetic.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "dictmt/error.hpp"
#include "dictmt/rng.hpp"
#include "dictmt/text.hpp"

namespace dictmt::synth {

const std::vector<std::string> kSuffixes = {"", "n", "s", "en", "er", "e", "es", "em"};

namespace {

struct Tok {
  std::string surface;
  std::string lemma;
};

struct SentencePlan {
  std::vector<Tok> src, tgt;
};

std::string entry_word(const char* prefix, int entry_id, int word, bool capitalize) {
  std::string lemma = std::string(prefix) + std::to_string(entry_id) +
                      static_cast<char>('a' + word);
  if (capitalize) lemma[0] = static_cast<char>(lemma[0] - 'a' + 'A');
  return lemma;
}

Tok background_tok(const char* prefix, int vocab, Rng& rng) {
  // Two draws biased toward low ranks give a crude Zipf-like shape.
  std::uint64_t rank = std::min(rng.bounded(static_cast<std::uint64_t>(vocab)),
                                rng.bounded(static_cast<std::uint64_t>(vocab)));
  std::string lemma = std::string(prefix) + std::to_string(rank);
  // Mostly the base form, occasionally inflected.
  std::string suffix = rng.bounded(10) < 6 ? "" : kSuffixes[rng.bounded(3)];
  return {lemma + suffix, lemma};
}

std::vector<Tok> background_line(const char* prefix, const SynthSpec& spec, Rng& rng) {
  std::size_t len = static_cast<std::size_t>(spec.min_len) +
                    rng.bounded(static_cast<std::uint64_t>(spec.max_len - spec.min_len + 1));
  std::vector<Tok> line;
  line.reserve(len);
  for (std::size_t i = 0; i < len; ++i)
    line.push_back(background_tok(prefix, spec.background_vocab, rng));
  return line;
}

void insert_phrase(std::vector<Tok>& line, const std::vector<Tok>& phrase, Rng& rng) {
  std::size_t pos = rng.bounded(line.size() + 1);
  line.insert(line.begin() + static_cast<std::ptrdiff_t>(pos), phrase.begin(), phrase.end());
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  Rng rng(spec.seed);
  SynthData data;
  std::vector<SentencePlan> plans;

  for (std::size_t e = 0; e < spec.entries.size(); ++e) {
    const PlantedEntry& planted = spec.entries[e];
    int id = static_cast<int>(e);

    DictEntry entry;
    entry.id = id;
    for (int w = 0; w < planted.phrase_len; ++w) {
      entry.src_lemma_phrase.push_back(entry_word("se", id, w, false));
      entry.tgt_lemma_phrase.push_back(entry_word("te", id, w, false));
    }
    data.dictionary.push_back(entry);

    auto src_phrase = [&](int occurrence) {
      std::vector<Tok> phrase;
      for (int w = 0; w < planted.phrase_len; ++w) {
        std::string lemma = entry_word("se", id, w, planted.case_probe);
        // Source-side inflection cycles independently; matching is on lemmas.
        std::string suffix =
            w + 1 == planted.phrase_len ? kSuffixes[static_cast<std::size_t>(occurrence) % 4] : "";
        phrase.push_back({lemma + suffix, lemma});
      }
      return phrase;
    };
    auto tgt_phrase = [&](int realization) {
      std::vector<Tok> phrase;
      for (int w = 0; w < planted.phrase_len; ++w) {
        std::string lemma = entry_word("te", id, w, planted.case_probe);
        std::string suffix =
            w + 1 == planted.phrase_len ? kSuffixes[static_cast<std::size_t>(realization)] : "";
        phrase.push_back({lemma + suffix, lemma});
      }
      return phrase;
    };

    int variants = planted.occurrences == 0
                       ? 0
                       : std::clamp(planted.variants, 1,
                                    std::min(planted.occurrences,
                                             static_cast<int>(kSuffixes.size())));
    for (int k = 0; k < planted.occurrences; ++k) {
      SentencePlan plan{background_line("qs", spec, rng), background_line("qt", spec, rng)};
      insert_phrase(plan.src, src_phrase(k), rng);
      insert_phrase(plan.tgt, tgt_phrase(k < variants ? k : 0), rng);
      plans.push_back(std::move(plan));
    }
    for (int k = 0; k < planted.src_only; ++k) {
      SentencePlan plan{background_line("qs", spec, rng), background_line("qt", spec, rng)};
      insert_phrase(plan.src, src_phrase(k), rng);
      plans.push_back(std::move(plan));
    }
    for (int k = 0; k < planted.tgt_only; ++k) {
      SentencePlan plan{background_line("qs", spec, rng), background_line("qt", spec, rng)};
      insert_phrase(plan.tgt, tgt_phrase(0), rng);
      plans.push_back(std::move(plan));
    }

    EntryStats expected;
    expected.occurrences = planted.occurrences;
    expected.tgt_variant_count = variants;
    expected.src_only_count = planted.src_only;
    expected.tgt_only_count = planted.tgt_only;
    data.planted.push_back(expected);
  }

  for (std::size_t i = 0; i < spec.background_sentences; ++i)
    plans.push_back({background_line("qs", spec, rng), background_line("qt", spec, rng)});

  rng.shuffle(plans);

  std::vector<SentencePair> pairs;
  pairs.reserve(plans.size());
  for (SentencePlan& plan : plans) {
    SentencePair pair;
    for (Tok& tok : plan.src) {
      pair.src_tokens.push_back(std::move(tok.surface));
      pair.src_lemmas.push_back(std::move(tok.lemma));
    }
    for (Tok& tok : plan.tgt) {
      pair.tgt_tokens.push_back(std::move(tok.surface));
      pair.tgt_lemmas.push_back(std::move(tok.lemma));
    }
    pairs.push_back(std::move(pair));
  }
  data.corpus = Corpus::from_pairs(std::move(pairs));
  return data;
}

SynthFiles write_corpus_files(const SynthData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::filesystem::path base(dir);
  SynthFiles files;
  files.src = (base / "corpus.src").string();
  files.tgt = (base / "corpus.tgt").string();
  files.src_lemmas = (base / "corpus.src.lemmas").string();
  files.tgt_lemmas = (base / "corpus.tgt.lemmas").string();
  files.dict = (base / "dictionary.jsonl").string();
  files.tgt_lemma_table = (base / "tgt.lemma-table.tsv").string();

  std::ofstream src(files.src, std::ios::binary), tgt(files.tgt, std::ios::binary);
  std::ofstream src_lem(files.src_lemmas, std::ios::binary),
      tgt_lem(files.tgt_lemmas, std::ios::binary);
  if (!src || !tgt || !src_lem || !tgt_lem) throw IoError("cannot write synthetic corpus files");
  std::map<std::string, std::string> tgt_table;
  for (const SentencePair& pair : data.corpus.pairs()) {
    src << join(pair.src_tokens) << '\n';
    tgt << join(pair.tgt_tokens) << '\n';
    src_lem << join(pair.src_lemmas) << '\n';
    tgt_lem << join(pair.tgt_lemmas) << '\n';
    for (std::size_t i = 0; i < pair.tgt_tokens.size(); ++i)
      tgt_table.emplace(pair.tgt_tokens[i], pair.tgt_lemmas[i]);
  }

  save_dictionary_jsonl(data.dictionary, files.dict);

  std::ofstream table(files.tgt_lemma_table, std::ios::binary);
  if (!table) throw IoError("cannot write lemma table");
  for (const auto& [surface, lemma] : tgt_table) table << surface << '\t' << lemma << '\n';
  return files;
}

SynthSpec scale_spec(std::size_t total_sentences) {
  SynthSpec spec;
  spec.seed = 20260808;
  spec.background_vocab = 400;
  spec.min_len = 5;
  spec.max_len = 14;

  std::size_t planted_sentences = 0;
  auto add = [&](PlantedEntry entry) {
    planted_sentences += static_cast<std::size_t>(entry.occurrences + entry.src_only +
                                                  entry.tgt_only);
    spec.entries.push_back(entry);
  };

  // Rare accepted entries: occurrences cycle 3..9 (mean 6), at least two
  // target realizations, no conflicts.
  for (int i = 0; i < 1060; ++i) {
    PlantedEntry e;
    e.occurrences = 3 + i % 7;
    e.variants = 2 + i % 2;
    e.phrase_len = i % 5 == 0 ? 2 : 1;
    e.case_probe = i % 9 == 0;
    add(e);
  }
  // Frequent entries: rejected by the occurrence ceiling but eligible for
  // the extra-annotation pass.
  for (int i = 0; i < 200; ++i) {
    PlantedEntry e;
    e.occurrences = 90 + i % 21;
    e.variants = 2;
    add(e);
  }
  // Below the occurrence floor.
  for (int i = 0; i < 100; ++i) {
    PlantedEntry e;
    e.occurrences = i % 3;
    e.variants = 2;
    add(e);
  }
  // Single target realization.
  for (int i = 0; i < 60; ++i) {
    PlantedEntry e;
    e.occurrences = 4 + i % 6;
    e.variants = 1;
    add(e);
  }
  // Conflict-heavy.
  for (int i = 0; i < 60; ++i) {
    PlantedEntry e;
    e.occurrences = 4 + i % 6;
    e.variants = 2;
    if (i % 2 == 0)
      e.src_only = 10 + i % 5;
    else
      e.tgt_only = 10 + i % 5;
    add(e);
  }

  if (planted_sentences >= total_sentences)
    throw DataError("scale_spec: planted sentences exceed the requested corpus size");
  spec.background_sentences = total_sentences - planted_sentences;
  return spec;
}

// ---- oracles --------------------------------------------------------------

namespace {

// Position-by-position folded comparison, written independently of
// match_side on purpose.
bool phrase_at(const std::vector<std::string>& lemmas, std::size_t pos,
               const std::vector<std::string>& phrase) {
  if (pos + phrase.size() > lemmas.size()) return false;
  for (std::size_t j = 0; j < phrase.size(); ++j)
    if (fold_case(lemmas[pos + j]) != fold_case(phrase[j])) return false;
  return true;
}

bool side_matches(const std::vector<std::string>& lemmas,
                  const std::vector<std::string>& phrase, std::size_t* first) {
  for (std::size_t pos = 0; pos + phrase.size() <= lemmas.size(); ++pos) {
    if (phrase_at(lemmas, pos, phrase)) {
      if (first != nullptr) *first = pos;
      return true;
    }
  }
  return false;
}

}  // namespace

EntryStats brute_entry_stats(const DictEntry& entry, const Corpus& corpus) {
  EntryStats stats;
  std::set<std::string> realizations;
  for (const SentencePair& pair : corpus.pairs()) {
    std::size_t tgt_pos = 0;
    bool src = side_matches(pair.src_lemmas, entry.src_lemma_phrase, nullptr);
    bool tgt = side_matches(pair.tgt_lemmas, entry.tgt_lemma_phrase, &tgt_pos);
    if (src && tgt) {
      ++stats.occurrences;
      std::string surface;
      for (std::size_t j = 0; j < entry.tgt_lemma_phrase.size(); ++j) {
        if (j > 0) surface += ' ';
        surface += pair.tgt_tokens[tgt_pos + j];
      }
      realizations.insert(surface);
    } else if (src) {
      ++stats.src_only_count;
    } else if (tgt) {
      ++stats.tgt_only_count;
    }
  }
  stats.tgt_variant_count = static_cast<std::int64_t>(realizations.size());
  return stats;
}

std::vector<MatchRecord> brute_find_matches(const Corpus& corpus,
                                            std::span<const DictEntry> entries) {
  std::vector<MatchRecord> records;
  for (const SentencePair& pair : corpus.pairs()) {
    for (const DictEntry& entry : entries) {
      std::size_t src_pos = 0, tgt_pos = 0;
      bool src = side_matches(pair.src_lemmas, entry.src_lemma_phrase, &src_pos);
      bool tgt = side_matches(pair.tgt_lemmas, entry.tgt_lemma_phrase, &tgt_pos);
      if (!src && !tgt) continue;
      MatchRecord record;
      record.sentence_id = pair.id;
      record.entry_id = entry.id;
      if (src) {
        record.src_span = Span{src_pos, entry.src_lemma_phrase.size()};
        record.src_surface.assign(pair.src_tokens.begin() + static_cast<std::ptrdiff_t>(src_pos),
                                  pair.src_tokens.begin() +
                                      static_cast<std::ptrdiff_t>(src_pos +
                                                                  entry.src_lemma_phrase.size()));
      }
      if (tgt) {
        record.tgt_span = Span{tgt_pos, entry.tgt_lemma_phrase.size()};
        record.tgt_surface.assign(pair.tgt_tokens.begin() + static_cast<std::ptrdiff_t>(tgt_pos),
                                  pair.tgt_tokens.begin() +
                                      static_cast<std::ptrdiff_t>(tgt_pos +
                                                                  entry.tgt_lemma_phrase.size()));
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

double reference_bleu(const std::vector<std::vector<std::string>>& hyps,
                      const std::vector<std::vector<std::string>>& refs, int max_n) {
  // Straight from the corpus BLEU definition, using ordered maps keyed by
  // token vectors rather than the library's hashed join keys.
  std::vector<double> correct(static_cast<std::size_t>(max_n), 0.0);
  std::vector<double> total(static_cast<std::size_t>(max_n), 0.0);
  double hyp_len = 0.0, ref_len = 0.0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    hyp_len += static_cast<double>(hyps[s].size());
    ref_len += static_cast<double>(refs[s].size());
    for (int n = 1; n <= max_n; ++n) {
      std::map<std::vector<std::string>, int> hyp_counts, ref_counts;
      std::size_t order = static_cast<std::size_t>(n);
      if (hyps[s].size() >= order) {
        for (std::size_t i = 0; i + order <= hyps[s].size(); ++i)
          ++hyp_counts[{hyps[s].begin() + static_cast<std::ptrdiff_t>(i),
                        hyps[s].begin() + static_cast<std::ptrdiff_t>(i + order)}];
      }
      if (refs[s].size() >= order) {
        for (std::size_t i = 0; i + order <= refs[s].size(); ++i)
          ++ref_counts[{refs[s].begin() + static_cast<std::ptrdiff_t>(i),
                        refs[s].begin() + static_cast<std::ptrdiff_t>(i + order)}];
      }
      for (const auto& [gram, count] : hyp_counts) {
        total[order - 1] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) correct[order - 1] += std::min(count, it->second);
      }
    }
  }
  if (hyp_len == 0.0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < max_n; ++n) {
    std::size_t i = static_cast<std::size_t>(n);
    if (total[i] == 0.0) continue;
    if (correct[i] == 0.0) return 0.0;
    log_sum += std::log(correct[i] / total[i]);
    ++orders;
  }
  if (orders == 0) return 0.0;
  double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / orders);
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::filesystem::path base = std::filesystem::temp_directory_path() /
                               ("dictmt-" + tag + "-" + std::to_string(::getpid()) + "-" +
                                std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(base);
  path_ = base.string();
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& name) const {
  return (std::filesystem::path(path_) / name).string();
}

}  // namespace dictmt::synth
