#include "dictmt/splitter.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "dictmt/error.hpp"
#include "dictmt/rng.hpp"
#include "dictmt/text.hpp"

namespace dictmt {

namespace {

constexpr std::uint64_t kPartitionStage = 1;
constexpr std::uint64_t kAssignStage = 2;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  return out;
}

}  // namespace

const char* entry_set_name(EntrySet set) {
  switch (set) {
    case EntrySet::Test: return "Test";
    case EntrySet::Mix: return "Mix";
    case EntrySet::Train: return "Train";
  }
  return "?";
}

const char* fate_name(Fate fate) {
  switch (fate) {
    case Fate::Train: return "Train";
    case Fate::Valid: return "Valid";
    case Fate::Test: return "Test";
    case Fate::Dropped: return "Dropped";
  }
  return "?";
}

EntrySet entry_set_from_name(const std::string& name) {
  if (name == "Test") return EntrySet::Test;
  if (name == "Mix") return EntrySet::Mix;
  if (name == "Train") return EntrySet::Train;
  throw DataError("unknown entry set: " + name);
}

Fate fate_from_name(const std::string& name) {
  if (name == "Train") return Fate::Train;
  if (name == "Valid") return Fate::Valid;
  if (name == "Test") return Fate::Test;
  if (name == "Dropped") return Fate::Dropped;
  throw DataError("unknown fate: " + name);
}

EntrySet EntryPartition::set_of(int entry_id) const {
  auto it = assignment.find(entry_id);
  if (it == assignment.end())
    throw DataError("entry id " + std::to_string(entry_id) + " not in partition");
  return it->second;
}

std::size_t SplitManifest::count(Fate fate) const {
  std::size_t n = 0;
  for (Fate f : sentence_fate)
    if (f == fate) ++n;
  return n;
}

EntryPartition partition_entries(std::span<const DictEntry> entries, std::uint64_t seed) {
  if (entries.empty()) throw DataError("cannot partition an empty entry list");
  std::vector<int> ids;
  ids.reserve(entries.size());
  for (const DictEntry& entry : entries) ids.push_back(entry.id);
  std::sort(ids.begin(), ids.end());

  Rng rng(Rng::derive(seed, kPartitionStage));
  rng.shuffle(ids);

  EntryPartition partition;
  partition.seed = seed;
  static const EntrySet kRoundRobin[3] = {EntrySet::Test, EntrySet::Mix, EntrySet::Train};
  for (std::size_t i = 0; i < ids.size(); ++i)
    partition.assignment.emplace(ids[i], kRoundRobin[i % 3]);
  return partition;
}

SplitManifest assign_sentences(const Corpus& corpus, std::span<const MatchRecord> matches,
                               const EntryPartition& partition, std::uint64_t seed) {
  const std::size_t n_sentences = corpus.size();
  constexpr int kUnassigned = -1;
  std::vector<int> fate(n_sentences, kUnassigned);

  // Index: both-sides sentences per entry, plus per-sentence flags.
  std::unordered_map<int, std::vector<int>> entry_sentences;
  std::vector<std::vector<int>> sentence_entries(n_sentences);
  std::vector<char> has_src_only(n_sentences, 0);

  for (const MatchRecord& record : matches) {
    if (record.sentence_id < 0 || static_cast<std::size_t>(record.sentence_id) >= n_sentences)
      throw DataError("match references unknown sentence id " +
                      std::to_string(record.sentence_id));
    EntrySet set = partition.set_of(record.entry_id);  // throws on unknown entry
    if (record.src_span && record.tgt_span) {
      entry_sentences[record.entry_id].push_back(record.sentence_id);
      sentence_entries[static_cast<std::size_t>(record.sentence_id)].push_back(record.entry_id);
      if (set == EntrySet::Test) fate[static_cast<std::size_t>(record.sentence_id)] =
          static_cast<int>(Fate::Test);  // rule 1
    } else if (record.src_span) {
      has_src_only[static_cast<std::size_t>(record.sentence_id)] = 1;
    }
  }

  std::vector<int> mix_ids, train_ids;
  for (const auto& [entry_id, set] : partition.assignment) {
    if (set == EntrySet::Mix) mix_ids.push_back(entry_id);
    if (set == EntrySet::Train) train_ids.push_back(entry_id);
  }
  std::sort(mix_ids.begin(), mix_ids.end());
  std::sort(train_ids.begin(), train_ids.end());

  Rng rng(Rng::derive(seed, kAssignStage));

  // Rule 2: per Mix entry, half test / quarter valid / quarter train with
  // ceil rounding toward the earlier bucket.
  for (int entry_id : mix_ids) {
    auto it = entry_sentences.find(entry_id);
    if (it == entry_sentences.end()) continue;
    std::vector<int> candidates;
    for (int sid : it->second)
      if (fate[static_cast<std::size_t>(sid)] == kUnassigned) candidates.push_back(sid);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    rng.shuffle(candidates);

    std::size_t n = candidates.size();
    std::size_t n_test = (n + 1) / 2;
    std::size_t rest = n - n_test;
    std::size_t n_valid = (rest + 1) / 2;
    for (std::size_t i = 0; i < n; ++i) {
      Fate f = i < n_test ? Fate::Test : (i < n_test + n_valid ? Fate::Valid : Fate::Train);
      fate[static_cast<std::size_t>(candidates[i])] = static_cast<int>(f);
    }
  }

  // Rule 3: one pool of the remaining Train-entry sentences, alternating.
  std::set<int> train_pool_set;
  for (int entry_id : train_ids) {
    auto it = entry_sentences.find(entry_id);
    if (it == entry_sentences.end()) continue;
    for (int sid : it->second)
      if (fate[static_cast<std::size_t>(sid)] == kUnassigned) train_pool_set.insert(sid);
  }
  std::vector<int> train_pool(train_pool_set.begin(), train_pool_set.end());
  rng.shuffle(train_pool);
  for (std::size_t i = 0; i < train_pool.size(); ++i)
    fate[static_cast<std::size_t>(train_pool[i])] =
        static_cast<int>(i % 2 == 0 ? Fate::Train : Fate::Valid);

  // Rule 4: everything else trains. Rule 5: the drop rule, extended to
  // Valid-bound sentences so validation stays consistent with training.
  SplitManifest manifest;
  manifest.seed = seed;
  manifest.partition = partition;
  manifest.sentence_fate.resize(n_sentences);
  manifest.sentence_entries.resize(n_sentences);
  for (std::size_t i = 0; i < n_sentences; ++i) {
    Fate f = fate[i] == kUnassigned ? Fate::Train : static_cast<Fate>(fate[i]);
    if ((f == Fate::Train || f == Fate::Valid) && has_src_only[i]) f = Fate::Dropped;
    manifest.sentence_fate[i] = f;
    std::vector<int>& ids = sentence_entries[i];
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    manifest.sentence_entries[i] = std::move(ids);
  }

  for (const auto& [entry_id, set] : partition.assignment) {
    ShotClass shot = set == EntrySet::Test  ? ShotClass::OneShot
                     : set == EntrySet::Mix ? ShotClass::FewShot
                                            : ShotClass::TrainOnly;
    manifest.shot_class.emplace(entry_id, shot);
  }
  return manifest;
}

SplitCounts export_split(const Corpus& corpus, const SplitManifest& manifest,
                         const std::string& out_dir) {
  if (manifest.sentence_fate.size() != corpus.size())
    throw DataError("manifest does not cover the corpus");
  std::filesystem::create_directories(out_dir);
  std::filesystem::path dir(out_dir);

  struct FilePair {
    std::ofstream src, tgt;
  };
  auto make_pair_files = [&](const char* stem) {
    return FilePair{open_out(dir / (std::string(stem) + ".src")),
                    open_out(dir / (std::string(stem) + ".tgt"))};
  };
  FilePair train = make_pair_files("train");
  FilePair valid = make_pair_files("valid");
  FilePair test = make_pair_files("test");
  FilePair dropped = make_pair_files("dropped");

  SplitCounts counts;
  for (const SentencePair& pair : corpus.pairs()) {
    FilePair* out = nullptr;
    switch (manifest.sentence_fate[static_cast<std::size_t>(pair.id)]) {
      case Fate::Train: out = &train; ++counts.train; break;
      case Fate::Valid: out = &valid; ++counts.valid; break;
      case Fate::Test: out = &test; ++counts.test; break;
      case Fate::Dropped: out = &dropped; ++counts.dropped; break;
    }
    out->src << join(pair.src_tokens) << '\n';
    out->tgt << join(pair.tgt_tokens) << '\n';
  }
  write_manifest_json(manifest, (dir / "manifest.json").string());
  return counts;
}

// Streamed by hand: a manifest covers every corpus sentence, and building a
// JSON DOM for that many records costs far more memory than it is worth.
// Every emitted value is an integer or a fixed enum name, so no escaping is
// needed.
void write_manifest_json(const SplitManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path);

  out << "{\n\"seed\": " << manifest.seed << ",\n\"entry_partition\": [";
  std::vector<int> entry_ids;
  for (const auto& [entry_id, set] : manifest.partition.assignment) entry_ids.push_back(entry_id);
  std::sort(entry_ids.begin(), entry_ids.end());
  for (std::size_t i = 0; i < entry_ids.size(); ++i) {
    out << (i == 0 ? "\n" : ",\n") << "{\"entry_id\": " << entry_ids[i] << ", \"set\": \""
        << entry_set_name(manifest.partition.assignment.at(entry_ids[i])) << "\"}";
  }
  out << "\n],\n\"sentence_fates\": [";
  for (std::size_t i = 0; i < manifest.sentence_fate.size(); ++i) {
    out << (i == 0 ? "\n" : ",\n") << "{\"id\": " << i << ", \"fate\": \""
        << fate_name(manifest.sentence_fate[i]) << "\", \"entry_ids\": [";
    const std::vector<int>& ids = manifest.sentence_entries[i];
    for (std::size_t j = 0; j < ids.size(); ++j) out << (j == 0 ? "" : ", ") << ids[j];
    out << "]}";
  }
  out << "\n],\n\"counts\": {\"train\": " << manifest.count(Fate::Train)
      << ", \"valid\": " << manifest.count(Fate::Valid)
      << ", \"test\": " << manifest.count(Fate::Test)
      << ", \"dropped\": " << manifest.count(Fate::Dropped) << "}\n}\n";
  if (!out) throw IoError("write failed: " + path);
}

SplitManifest read_manifest_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw DataError("malformed manifest: " + path);

  SplitManifest manifest;
  manifest.seed = doc.at("seed").get<std::uint64_t>();
  manifest.partition.seed = manifest.seed;
  for (const auto& item : doc.at("entry_partition")) {
    int entry_id = item.at("entry_id").get<int>();
    EntrySet set = entry_set_from_name(item.at("set").get<std::string>());
    manifest.partition.assignment.emplace(entry_id, set);
    ShotClass shot = set == EntrySet::Test  ? ShotClass::OneShot
                     : set == EntrySet::Mix ? ShotClass::FewShot
                                            : ShotClass::TrainOnly;
    manifest.shot_class.emplace(entry_id, shot);
  }
  const auto& fates = doc.at("sentence_fates");
  manifest.sentence_fate.resize(fates.size());
  manifest.sentence_entries.resize(fates.size());
  for (const auto& item : fates) {
    std::size_t id = item.at("id").get<std::size_t>();
    if (id >= manifest.sentence_fate.size())
      throw DataError("manifest sentence id out of range: " + std::to_string(id));
    manifest.sentence_fate[id] = fate_from_name(item.at("fate").get<std::string>());
    manifest.sentence_entries[id] = item.at("entry_ids").get<std::vector<int>>();
  }
  return manifest;
}

}  // namespace dictmt
