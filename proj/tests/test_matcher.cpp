#include <doctest.h>

#include "dictmt/matcher.hpp"
#include "dictmt/rng.hpp"
#include "dictmt/text.hpp"
#include "synthetic.hpp"

using namespace dictmt;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> words) {
  return {words.begin(), words.end()};
}

// Random corpora over a tiny shared vocabulary, so phrases collide, overlap
// and repeat across entries.
Corpus random_dense_corpus(Rng& rng, std::size_t sentences,
                           const std::vector<std::string>& vocab) {
  std::vector<SentencePair> pairs;
  for (std::size_t s = 0; s < sentences; ++s) {
    SentencePair pair;
    std::size_t src_len = 1 + rng.bounded(9);
    std::size_t tgt_len = 1 + rng.bounded(9);
    for (std::size_t i = 0; i < src_len; ++i) {
      pair.src_lemmas.push_back(vocab[rng.bounded(vocab.size())]);
      pair.src_tokens.push_back(pair.src_lemmas.back() + (rng.bounded(3) == 0 ? "X" : ""));
    }
    for (std::size_t i = 0; i < tgt_len; ++i) {
      pair.tgt_lemmas.push_back(vocab[rng.bounded(vocab.size())]);
      pair.tgt_tokens.push_back(pair.tgt_lemmas.back() + (rng.bounded(3) == 0 ? "Y" : ""));
    }
    pairs.push_back(std::move(pair));
  }
  return Corpus::from_pairs(std::move(pairs));
}

std::vector<DictEntry> random_entries(Rng& rng, std::size_t count,
                                      const std::vector<std::string>& vocab) {
  std::vector<DictEntry> entries;
  for (std::size_t e = 0; e < count; ++e) {
    DictEntry entry;
    entry.id = static_cast<int>(e);
    std::size_t src_len = 1 + rng.bounded(3);
    std::size_t tgt_len = 1 + rng.bounded(3);
    for (std::size_t i = 0; i < src_len; ++i)
      entry.src_lemma_phrase.push_back(vocab[rng.bounded(vocab.size())]);
    for (std::size_t i = 0; i < tgt_len; ++i)
      entry.tgt_lemma_phrase.push_back(vocab[rng.bounded(vocab.size())]);
    entries.push_back(std::move(entry));
  }
  return entries;
}

bool records_equal(const MatchRecord& a, const MatchRecord& b) {
  return a.sentence_id == b.sentence_id && a.entry_id == b.entry_id &&
         a.src_span == b.src_span && a.tgt_span == b.tgt_span &&
         a.src_surface == b.src_surface && a.tgt_surface == b.tgt_surface;
}

}  // namespace

TEST_CASE("match_side finds all contiguous matches, overlaps included") {
  CHECK(match_side(toks({"a", "b", "a", "b"}), toks({"a", "b"})) ==
        std::vector<Span>{{0, 2}, {2, 2}});
  CHECK(match_side(toks({"a"}), toks({"a", "b"})).empty());
  CHECK(match_side(toks({"a", "a", "a"}), toks({"a", "a"})) ==
        std::vector<Span>{{0, 2}, {1, 2}});
  CHECK(match_side(toks({"Tell", "us"}), toks({"tell"})) == std::vector<Span>{{0, 1}});
}

TEST_CASE("find_matches maps a lemma match back to the surface") {
  SentencePair pair;
  pair.src_tokens = toks({"Tell", "us", "what", "have", "you", "got", "against", "giraffes"});
  pair.src_lemmas = toks({"tell", "us", "what", "have", "you", "get", "against", "giraffe"});
  pair.tgt_tokens = toks({"was", "haben", "Sie", "gegen", "Giraffen"});
  pair.tgt_lemmas = toks({"was", "haben", "Sie", "gegen", "Giraffe"});
  Corpus corpus = Corpus::from_pairs({pair});

  DictEntry entry;
  entry.id = 0;
  entry.src_lemma_phrase = {"giraffe"};
  entry.tgt_lemma_phrase = {"Giraffe"};

  std::vector<MatchRecord> records = find_matches(corpus, {&entry, 1});
  REQUIRE(records.size() == 1);
  CHECK(records[0].src_span == Span{7, 1});
  CHECK(records[0].src_surface == std::vector<std::string>{"giraffes"});
  CHECK(records[0].tgt_span == Span{4, 1});
  CHECK(records[0].tgt_surface == std::vector<std::string>{"Giraffen"});
}

TEST_CASE("find_matches yields nothing without a lemma match") {
  SentencePair pair;
  pair.src_tokens = toks({"nothing", "here"});
  pair.tgt_tokens = toks({"nichts", "hier"});
  Corpus corpus = Corpus::from_pairs({pair});
  DictEntry entry;
  entry.src_lemma_phrase = {"giraffe"};
  entry.tgt_lemma_phrase = {"Giraffe"};
  CHECK(find_matches(corpus, {&entry, 1}).empty());
}

TEST_CASE("find_matches keeps the leftmost occurrence per entry and side") {
  SentencePair pair;
  pair.src_tokens = toks({"b", "a", "c", "a"});
  pair.src_lemmas = toks({"b", "a", "c", "a"});
  pair.tgt_tokens = toks({"a", "z", "a"});
  pair.tgt_lemmas = toks({"a", "z", "a"});
  Corpus corpus = Corpus::from_pairs({pair});
  DictEntry entry;
  entry.src_lemma_phrase = {"a"};
  entry.tgt_lemma_phrase = {"a"};
  std::vector<MatchRecord> records = find_matches(corpus, {&entry, 1});
  REQUIRE(records.size() == 1);
  CHECK(records[0].src_span == Span{1, 1});
  CHECK(records[0].tgt_span == Span{0, 1});
}

TEST_CASE("find_matches reports nested and suffix patterns") {
  SentencePair pair;
  pair.src_tokens = {"a", "b", "c"};
  pair.tgt_tokens = {"x"};
  Corpus corpus = Corpus::from_pairs({pair});

  std::vector<DictEntry> entries(4);
  entries[0].id = 0;
  entries[0].src_lemma_phrase = {"b"};
  entries[0].tgt_lemma_phrase = {"zz"};
  entries[1].id = 1;
  entries[1].src_lemma_phrase = {"a", "b"};
  entries[1].tgt_lemma_phrase = {"zz"};
  entries[2].id = 2;
  entries[2].src_lemma_phrase = {"a", "b", "c"};
  entries[2].tgt_lemma_phrase = {"zz"};
  entries[3].id = 3;
  entries[3].src_lemma_phrase = {"a", "b", "c", "d"};  // longer than the sentence
  entries[3].tgt_lemma_phrase = {"zz"};

  std::vector<MatchRecord> records = find_matches(corpus, entries);
  REQUIRE(records.size() == 3);
  CHECK(records[0].entry_id == 1);  // sorted by src start, then entry id
  CHECK(records[0].src_span == Span{0, 2});
  CHECK(records[1].entry_id == 2);
  CHECK(records[1].src_span == Span{0, 3});
  CHECK(records[2].entry_id == 0);
  CHECK(records[2].src_span == Span{1, 1});
}

TEST_CASE("find_matches equals the brute-force scan on dense random corpora") {
  std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
  Rng rng(99);
  for (int round = 0; round < 30; ++round) {
    Corpus corpus = random_dense_corpus(rng, 1 + rng.bounded(100), vocab);
    std::vector<DictEntry> entries = random_entries(rng, 1 + rng.bounded(8), vocab);
    // Entry phrases may repeat across ids; the matcher must still report each
    // entry separately.
    std::vector<MatchRecord> fast = find_matches(corpus, entries);
    std::vector<MatchRecord> brute = synth::brute_find_matches(corpus, entries);
    REQUIRE(fast.size() == brute.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CAPTURE(round);
      CAPTURE(i);
      CHECK(records_equal(fast[i], brute[i]));
    }

    // Determinism: a second run is identical.
    std::vector<MatchRecord> again = find_matches(corpus, entries);
    REQUIRE(again.size() == fast.size());
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(records_equal(again[i], fast[i]));

    // Every surface slice re-lemmatizes to the entry phrase (case-folded).
    for (const MatchRecord& record : fast) {
      if (!record.src_span) continue;
      const SentencePair& pair = corpus.pairs()[static_cast<std::size_t>(record.sentence_id)];
      const DictEntry& entry = entries[static_cast<std::size_t>(record.entry_id)];
      for (std::size_t j = 0; j < record.src_span->length; ++j) {
        CHECK(fold_case(pair.src_lemmas[record.src_span->start + j]) ==
              fold_case(entry.src_lemma_phrase[j]));
      }
    }
  }
}

TEST_CASE("select_annotation_matches resolves overlaps") {
  auto make = [](int entry_id, std::size_t start, std::size_t len) {
    MatchRecord r;
    r.sentence_id = 0;
    r.entry_id = entry_id;
    r.src_span = Span{start, len};
    return r;
  };

  SUBCASE("longest match wins") {
    std::vector<MatchRecord> records = {make(5, 0, 1), make(7, 0, 2)};
    std::vector<MatchRecord> selected = select_annotation_matches(records);
    REQUIRE(selected.size() == 1);
    CHECK(selected[0].entry_id == 7);
  }
  SUBCASE("equal length ties break toward the lower entry id") {
    std::vector<MatchRecord> records = {make(9, 1, 2), make(2, 0, 2)};
    std::vector<MatchRecord> selected = select_annotation_matches(records);
    REQUIRE(selected.size() == 1);
    CHECK(selected[0].entry_id == 2);
  }
  SUBCASE("disjoint spans all survive, sorted by start") {
    std::vector<MatchRecord> records = {make(3, 4, 2), make(1, 0, 2), make(2, 2, 1)};
    std::vector<MatchRecord> selected = select_annotation_matches(records);
    REQUIRE(selected.size() == 3);
    CHECK(selected[0].src_span->start == 0);
    CHECK(selected[1].src_span->start == 2);
    CHECK(selected[2].src_span->start == 4);
  }
  SUBCASE("records without a source span are dropped") {
    MatchRecord tgt_only;
    tgt_only.sentence_id = 0;
    tgt_only.entry_id = 1;
    tgt_only.tgt_span = Span{0, 1};
    std::vector<MatchRecord> records = {tgt_only};
    CHECK(select_annotation_matches(records).empty());
  }
}

TEST_CASE("match records survive a JSONL round trip") {
  synth::TempDir dir("matches");
  std::vector<MatchRecord> records(2);
  records[0].sentence_id = 3;
  records[0].entry_id = 1;
  records[0].src_span = Span{2, 1};
  records[0].src_surface = {"with \"quote\""};
  records[1].sentence_id = 4;
  records[1].entry_id = 0;
  records[1].tgt_span = Span{0, 2};
  records[1].tgt_surface = {"a", "b"};
  write_matches_jsonl(records, dir.file("m.jsonl"));
  std::vector<MatchRecord> loaded = read_matches_jsonl(dir.file("m.jsonl"));
  REQUIRE(loaded.size() == 2);
  CHECK(records_equal(loaded[0], records[0]));
  CHECK(records_equal(loaded[1], records[1]));
}
