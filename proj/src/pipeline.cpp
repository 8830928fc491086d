#include "dictmt/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>

#include <json.hpp>

#include "dictmt/annotator.hpp"
#include "dictmt/corpus.hpp"
#include "dictmt/error.hpp"
#include "dictmt/matcher.hpp"
#include "dictmt/splitter.hpp"
#include "dictmt/text.hpp"

namespace dictmt {

namespace {

namespace fs = std::filesystem;

nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json doc;
  doc["src"] = c.src_path;
  doc["tgt"] = c.tgt_path;
  doc["src_lemmas"] = c.src_lemma_path;
  doc["tgt_lemmas"] = c.tgt_lemma_path;
  doc["dict"] = c.dict_path;
  doc["out_dir"] = c.out_dir;
  doc["seed"] = c.seed;
  doc["thresholds"] = {{"min_occ", c.thresholds.min_occ},
                       {"max_occ", c.thresholds.max_occ},
                       {"min_variants", c.thresholds.min_tgt_variants},
                       {"max_conflicts", c.thresholds.max_conflicts}};
  doc["scheme"] = scheme_name(c.scheme);
  doc["bpe_merges"] = c.bpe_merges;
  doc["bpe_joint"] = c.bpe_joint;
  doc["mix_k"] = c.mix_k;
  doc["delimiter"] = c.delimiter;
  doc["escape"] = c.escape_delimiter;
  doc["add_annot"] = c.add_annot;
  return doc;
}

PipelineConfig config_from_json(const nlohmann::json& doc) {
  PipelineConfig c;
  c.src_path = doc.value("src", "");
  c.tgt_path = doc.value("tgt", "");
  c.src_lemma_path = doc.value("src_lemmas", "");
  c.tgt_lemma_path = doc.value("tgt_lemmas", "");
  c.dict_path = doc.value("dict", "");
  c.out_dir = doc.value("out_dir", "");
  c.seed = doc.value("seed", std::uint64_t{1});
  if (doc.contains("thresholds")) {
    const auto& t = doc.at("thresholds");
    c.thresholds.min_occ = t.value("min_occ", c.thresholds.min_occ);
    c.thresholds.max_occ = t.value("max_occ", c.thresholds.max_occ);
    c.thresholds.min_tgt_variants = t.value("min_variants", c.thresholds.min_tgt_variants);
    c.thresholds.max_conflicts = t.value("max_conflicts", c.thresholds.max_conflicts);
  }
  c.scheme = scheme_from_name(doc.value("scheme", "mixed"));
  c.bpe_merges = doc.value("bpe_merges", std::size_t{20000});
  c.bpe_joint = doc.value("bpe_joint", false);
  c.mix_k = doc.value("mix_k", std::int64_t{50});
  c.delimiter = doc.value("delimiter", "#");
  c.escape_delimiter = doc.value("escape", false);
  c.add_annot = doc.value("add_annot", false);
  return c;
}

struct StageRunner {
  const PipelineConfig& config;
  std::string current_stage;

  template <typename Fn>
  auto run(const std::string& name, Fn&& fn) {
    current_stage = name;
    try {
      return fn();
    } catch (const DataError& e) {
      write_incomplete(e.what());
      throw DataError("stage " + name + ": " + e.what());
    } catch (const std::exception& e) {
      write_incomplete(e.what());
      throw;
    }
  }

  void write_incomplete(const std::string& error) const {
    nlohmann::ordered_json doc;
    doc["status"] = "incomplete";
    doc["failed_stage"] = current_stage;
    doc["error"] = error;
    doc["config"] = config_to_json(config);
    std::ofstream out(fs::path(config.out_dir) / "run.json", std::ios::binary);
    if (out) out << doc.dump(2) << '\n';
  }
};

}  // namespace

std::string PipelineConfig::to_json_string() const { return config_to_json(*this).dump(2); }

PipelineConfig PipelineConfig::from_json_string(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw DataError("malformed pipeline config");
  return config_from_json(doc);
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return from_json_string(text);
}

void PipelineConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config: " + path);
  out << to_json_string() << '\n';
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.out_dir.empty()) throw DataError("pipeline: out_dir is required");
  fs::create_directories(config.out_dir);
  fs::path dir(config.out_dir);

  StageRunner stage{config, "load"};
  PipelineResult result;
  std::vector<std::string> artifacts;
  auto track = [&](const fs::path& path) { artifacts.push_back(path.filename().string()); };

  // -- load ---------------------------------------------------------------
  Corpus corpus = stage.run("load", [&] {
    Corpus c = Corpus::load_parallel(config.src_path, config.tgt_path);
    if (!config.src_lemma_path.empty()) c.apply_lemma_file(Side::Source, config.src_lemma_path);
    if (!config.tgt_lemma_path.empty()) c.apply_lemma_file(Side::Target, config.tgt_lemma_path);
    return c;
  });
  result.sentences = corpus.size();

  std::vector<DictEntry> entries =
      stage.run("load", [&] { return load_dictionary(config.dict_path); });
  result.entries = entries.size();

  // -- stats --------------------------------------------------------------
  std::vector<EntryStats> stats =
      stage.run("stats", [&] { return compute_all_stats(entries, corpus); });
  stage.run("stats", [&] {
    write_stats_tsv(entries, stats, (dir / "entry_stats.tsv").string());
    track(dir / "entry_stats.tsv");
    return 0;
  });

  // -- filter -------------------------------------------------------------
  std::vector<DictEntry> filtered = stage.run("filter", [&] {
    auto accepted = filter_entries(entries, stats, config.thresholds);
    if (accepted.empty())
      throw DataError("no dictionary entries survive the thresholds; nothing to split on");
    save_dictionary_jsonl(accepted, (dir / "filtered.jsonl").string());
    track(dir / "filtered.jsonl");
    return accepted;
  });
  result.filtered_entries = filtered.size();

  // -- match --------------------------------------------------------------
  std::vector<MatchRecord> matches =
      stage.run("match", [&] { return find_matches(corpus, filtered); });
  stage.run("match", [&] {
    write_matches_jsonl(matches, (dir / "matches.jsonl").string());
    track(dir / "matches.jsonl");
    return 0;
  });
  result.matches = matches.size();

  // -- partition / assign / export -----------------------------------------
  EntryPartition partition =
      stage.run("partition", [&] { return partition_entries(filtered, config.seed); });
  SplitManifest manifest = stage.run(
      "assign", [&] { return assign_sentences(corpus, matches, partition, config.seed); });
  SplitCounts counts = stage.run("export", [&] {
    SplitCounts c = export_split(corpus, manifest, config.out_dir);
    for (const char* stem : {"train", "valid", "test", "dropped"}) {
      track(dir / (std::string(stem) + ".src"));
      track(dir / (std::string(stem) + ".tgt"));
    }
    track(dir / "manifest.json");
    return c;
  });
  result.train = counts.train;
  result.valid = counts.valid;
  result.test = counts.test;
  result.dropped = counts.dropped;

  // -- annotate -------------------------------------------------------------
  // Streams straight to the annotated files; at full-corpus scale the lines
  // are not worth holding in memory.
  stage.run("annotate", [&] {
    std::vector<MatchRecord> extra;
    if (config.add_annot) {
      extra = build_extra_annotations(corpus, entries, stats, config.thresholds, manifest);
      write_matches_jsonl(extra, (dir / "extra_matches.jsonl").string());
      track(dir / "extra_matches.jsonl");
    }
    result.extra_matches = extra.size();

    std::vector<std::vector<const MatchRecord*>> per_sentence(corpus.size());
    for (const MatchRecord& record : matches)
      per_sentence[static_cast<std::size_t>(record.sentence_id)].push_back(&record);
    for (const MatchRecord& record : extra)
      per_sentence[static_cast<std::size_t>(record.sentence_id)].push_back(&record);

    EntryIndex index(entries);
    AnnotationConfig annotation;
    annotation.delimiter = config.delimiter;
    annotation.escape = config.escape_delimiter;
    annotation.annotate_extra = config.add_annot;

    std::ofstream train_out(dir / "train.annot.src", std::ios::binary);
    std::ofstream valid_out(dir / "valid.annot.src", std::ios::binary);
    std::ofstream test_out(dir / "test.annot.src", std::ios::binary);
    if (!train_out || !valid_out || !test_out)
      throw IoError("cannot write annotated sources in " + config.out_dir);

    for (const SentencePair& pair : corpus.pairs()) {
      Fate fate = manifest.sentence_fate[static_cast<std::size_t>(pair.id)];
      if (fate == Fate::Dropped) continue;

      std::vector<MatchRecord> eligible;
      bool has_base_annotation = false;
      for (const MatchRecord* record : per_sentence[static_cast<std::size_t>(pair.id)]) {
        if (!record->src_span) continue;
        bool is_extra = partition.assignment.find(record->entry_id) == partition.assignment.end();
        if (fate == Fate::Test) {
          // At evaluation time the dictionary fires on the source; only
          // held-out (Test/Mix) entries are suggested.
          if (is_extra) continue;
          EntrySet set = partition.set_of(record->entry_id);
          if (set == EntrySet::Train) continue;
        } else {
          if (!record->tgt_span) continue;
          if (!is_extra && partition.set_of(record->entry_id) == EntrySet::Test) continue;
        }
        eligible.push_back(*record);
        has_base_annotation |= !is_extra;
      }

      std::vector<std::string> annotated =
          eligible.empty()
              ? apply_delimiter_policy(pair.src_tokens, annotation, pair.id)
              : annotate_sentence(pair, select_annotation_matches(eligible), index, annotation);
      // The annotated_* counts track base-dictionary annotations; extra
      // (frequent-entry) annotations are accounted for by extra_matches.
      switch (fate) {
        case Fate::Train:
          train_out << join(annotated) << '\n';
          if (has_base_annotation) ++result.annotated_train;
          break;
        case Fate::Valid:
          valid_out << join(annotated) << '\n';
          if (has_base_annotation) ++result.annotated_valid;
          break;
        case Fate::Test:
          test_out << join(annotated) << '\n';
          if (has_base_annotation) ++result.annotated_test;
          break;
        case Fate::Dropped: break;
      }
    }
    if (!train_out || !valid_out || !test_out)
      throw IoError("write failed for annotated sources in " + config.out_dir);
    track(dir / "train.annot.src");
    track(dir / "valid.annot.src");
    track(dir / "test.annot.src");
    return 0;
  });

  // -- segment --------------------------------------------------------------
  stage.run("segment", [&] {
    // Train-split frequencies, taken before annotation.
    std::unordered_map<std::string, std::int64_t> src_freq, tgt_freq;
    for (const SentencePair& pair : corpus.pairs()) {
      if (manifest.sentence_fate[static_cast<std::size_t>(pair.id)] != Fate::Train) continue;
      for (const std::string& t : pair.src_tokens) ++src_freq[t];
      for (const std::string& t : pair.tgt_tokens) ++tgt_freq[t];
    }

    const std::string ext = scheme_name(config.scheme);

    std::unique_ptr<BpeModel> joint_model;
    if (config.scheme == Scheme::Bpe && config.bpe_joint) {
      std::unordered_map<std::string, std::int64_t> learn_freq = src_freq;
      for (const auto& [w, c] : tgt_freq) learn_freq[w] += c;
      joint_model = std::make_unique<BpeModel>(learn_bpe(learn_freq, config.bpe_merges));
      joint_model->save((dir / "bpe.joint.model").string());
      track(dir / "bpe.joint.model");
    }

    auto segment_file = [&](const fs::path& in_path, const fs::path& out_path,
                            const std::function<std::vector<std::string>(
                                std::span<const std::string>)>& segment) {
      std::ifstream in(in_path, std::ios::binary);
      if (!in) throw IoError("cannot open: " + in_path.string());
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw IoError("cannot write: " + out_path.string());
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out << join(segment(split_whitespace(line))) << '\n';
      }
      if (!out) throw IoError("write failed: " + out_path.string());
      track(out_path);
    };

    auto segment_side = [&](Side side) {
      const auto& freq = side == Side::Source ? src_freq : tgt_freq;
      std::function<std::vector<std::string>(std::span<const std::string>)> segment;
      std::unique_ptr<BpeModel> model;
      std::unique_ptr<BpeApplier> applier;

      if (config.scheme == Scheme::Bpe) {
        const BpeModel* active = joint_model.get();
        if (active == nullptr) {
          model = std::make_unique<BpeModel>(learn_bpe(freq, config.bpe_merges));
          std::string model_name = side == Side::Source ? "bpe.src.model" : "bpe.tgt.model";
          model->save((dir / model_name).string());
          track(dir / model_name);
          active = model.get();
        }
        applier = std::make_unique<BpeApplier>(*active);
        segment = [a = applier.get()](std::span<const std::string> tokens) {
          return a->apply(tokens);
        };
      } else if (config.scheme == Scheme::Chars) {
        segment = [](std::span<const std::string> tokens) { return segment_chars(tokens); };
      } else {
        MixConfig mix;
        mix.char_threshold = config.mix_k;
        mix.freq_table = &freq;
        mix.annot_all_chars = config.scheme == Scheme::MixedAnnot;
        mix.delimiter = config.delimiter;
        segment = [mix](std::span<const std::string> tokens) {
          return segment_mixed(tokens, mix);
        };
      }

      for (const char* stem : {"train", "valid", "test"}) {
        std::string in_name, out_name;
        if (side == Side::Source) {
          in_name = std::string(stem) + ".annot.src";
          out_name = std::string(stem) + ".annot." + ext + ".src";
        } else {
          in_name = std::string(stem) + ".tgt";
          out_name = std::string(stem) + "." + ext + ".tgt";
        }
        segment_file(dir / in_name, dir / out_name, segment);
      }
    };

    segment_side(Side::Source);
    segment_side(Side::Target);
    return 0;
  });

  // -- run.json ---------------------------------------------------------------
  for (const std::string& name : artifacts)
    result.digests[name] = to_hex(fnv1a64_file((dir / name).string()));

  nlohmann::ordered_json run;
  run["status"] = "complete";
  run["config"] = config_to_json(config);
  run["counts"] = {{"sentences", result.sentences},
                   {"entries", result.entries},
                   {"filtered_entries", result.filtered_entries},
                   {"matches", result.matches},
                   {"extra_matches", result.extra_matches},
                   {"train", result.train},
                   {"valid", result.valid},
                   {"test", result.test},
                   {"dropped", result.dropped},
                   {"annotated_train", result.annotated_train},
                   {"annotated_valid", result.annotated_valid},
                   {"annotated_test", result.annotated_test}};
  nlohmann::ordered_json digests;
  for (const auto& [name, digest] : result.digests) digests[name] = digest;
  run["artifacts"] = std::move(digests);
  std::ofstream out(dir / "run.json", std::ios::binary);
  if (!out) throw IoError("cannot write run.json");
  out << run.dump(2) << '\n';
  if (!out) throw IoError("write failed: run.json");
  return result;
}

}  // namespace dictmt
