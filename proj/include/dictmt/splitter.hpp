#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dictmt/corpus.hpp"
#include "dictmt/dictionary.hpp"
#include "dictmt/matcher.hpp"

namespace dictmt {

enum class EntrySet { Test, Mix, Train };
enum class Fate { Train, Valid, Test, Dropped };
enum class ShotClass { OneShot, FewShot, TrainOnly };

const char* entry_set_name(EntrySet set);
const char* fate_name(Fate fate);
EntrySet entry_set_from_name(const std::string& name);
Fate fate_from_name(const std::string& name);

struct EntryPartition {
  std::unordered_map<int, EntrySet> assignment;
  std::uint64_t seed = 0;

  EntrySet set_of(int entry_id) const;
};

struct SplitManifest {
  std::vector<Fate> sentence_fate;  // indexed by sentence id
  std::unordered_map<int, ShotClass> shot_class;
  std::uint64_t seed = 0;
  // Entries with a both-sides match in the sentence, ascending, per sentence.
  std::vector<std::vector<int>> sentence_entries;
  EntryPartition partition;

  std::size_t count(Fate fate) const;
};

// Seeded shuffle followed by round-robin assignment Test, Mix, Train, so the
// three set sizes never differ by more than one.
EntryPartition partition_entries(std::span<const DictEntry> entries, std::uint64_t seed);

// Sentence assignment, in order:
//   1. both-sides match of a Test-set entry        -> Test
//   2. per Mix-set entry (ascending id), its still-unassigned matched
//      sentences after a seeded shuffle            -> ceil(n/2) Test,
//                                                     ceil(rest/2) Valid,
//                                                     remainder Train
//   3. remaining sentences matched by Train-set entries, seeded shuffle,
//      alternating                                 -> Train / Valid
//   4. everything unmatched                        -> Train
//   5. Train- or Valid-fated sentences where some entry matched the source
//      but not the target                          -> Dropped
SplitManifest assign_sentences(const Corpus& corpus, std::span<const MatchRecord> matches,
                               const EntryPartition& partition, std::uint64_t seed);

struct SplitCounts {
  std::size_t train = 0, valid = 0, test = 0, dropped = 0;
};

// Writes {train,valid,test,dropped}.{src,tgt} plus manifest.json.
SplitCounts export_split(const Corpus& corpus, const SplitManifest& manifest,
                         const std::string& out_dir);

void write_manifest_json(const SplitManifest& manifest, const std::string& path);
SplitManifest read_manifest_json(const std::string& path);

}  // namespace dictmt
