#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dictmt/annotator.hpp"
#include "dictmt/corpus.hpp"
#include "dictmt/dictionary.hpp"
#include "dictmt/error.hpp"
#include "dictmt/evaluator.hpp"
#include "dictmt/matcher.hpp"
#include "dictmt/oracle.hpp"
#include "dictmt/pipeline.hpp"
#include "dictmt/segmenter.hpp"
#include "dictmt/splitter.hpp"
#include "dictmt/text.hpp"

namespace {

using namespace dictmt;

struct CorpusOpts {
  std::string src, tgt, src_lemmas, tgt_lemmas;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--src", src, "source-side corpus, one tokenized sentence per line")
        ->required();
    cmd->add_option("--tgt", tgt, "target-side corpus, aligned with --src")->required();
    cmd->add_option("--src-lemmas", src_lemmas, "source lemma file (lines, TSV or CoNLL-U)");
    cmd->add_option("--tgt-lemmas", tgt_lemmas, "target lemma file");
  }

  Corpus load() const {
    Corpus corpus = Corpus::load_parallel(src, tgt);
    if (!src_lemmas.empty()) corpus.apply_lemma_file(Side::Source, src_lemmas);
    if (!tgt_lemmas.empty()) corpus.apply_lemma_file(Side::Target, tgt_lemmas);
    return corpus;
  }
};

struct ThresholdOpts {
  FilterThresholds values;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--min-occ", values.min_occ, "minimum occurrences (default 3)");
    cmd->add_option("--max-occ", values.max_occ, "maximum occurrences (default 80)");
    cmd->add_option("--min-variants", values.min_tgt_variants,
                    "minimum distinct target realizations (default 2)");
    cmd->add_option("--max-conflicts", values.max_conflicts,
                    "exclusive bound on one-sided matches (default 10)");
  }
};

void write_lines(const std::vector<std::vector<std::string>>& lines, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path);
  for (const auto& tokens : lines) out << join(tokens) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void setup_stats(CLI::App& app) {
  auto* cmd = app.add_subcommand("stats", "compute per-entry corpus match statistics");
  auto corpus_opts = std::make_shared<CorpusOpts>();
  auto dict = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  corpus_opts->add_to(cmd);
  cmd->add_option("--dict", *dict, "bilingual dictionary (JSONL or TSV)")->required();
  cmd->add_option("-o,--out", *out, "output TSV")->required();
  cmd->callback([corpus_opts, dict, out] {
    Corpus corpus = corpus_opts->load();
    std::vector<DictEntry> entries = load_dictionary(*dict);
    std::vector<EntryStats> stats = compute_all_stats(entries, corpus);
    write_stats_tsv(entries, stats, *out);
    std::cerr << "wrote stats for " << entries.size() << " entries to " << *out << "\n";
  });
}

void setup_filter(CLI::App& app) {
  auto* cmd = app.add_subcommand("filter", "filter dictionary entries by corpus statistics");
  auto corpus_opts = std::make_shared<CorpusOpts>();
  auto thresholds = std::make_shared<ThresholdOpts>();
  auto dict = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto stats_out = std::make_shared<std::string>();
  corpus_opts->add_to(cmd);
  thresholds->add_to(cmd);
  cmd->add_option("--dict", *dict, "bilingual dictionary")->required();
  cmd->add_option("-o,--out", *out, "accepted entries (JSONL)")->required();
  cmd->add_option("--stats-out", *stats_out, "also write the statistics TSV");
  cmd->callback([corpus_opts, thresholds, dict, out, stats_out] {
    Corpus corpus = corpus_opts->load();
    std::vector<DictEntry> entries = load_dictionary(*dict);
    std::vector<EntryStats> stats = compute_all_stats(entries, corpus);
    if (!stats_out->empty()) write_stats_tsv(entries, stats, *stats_out);
    std::vector<DictEntry> accepted = filter_entries(entries, stats, thresholds->values);
    save_dictionary_jsonl(accepted, *out);
    std::cerr << "accepted " << accepted.size() << " of " << entries.size() << " entries\n";
  });
}

void setup_match(CLI::App& app) {
  auto* cmd = app.add_subcommand("match", "find dictionary occurrences in a parallel corpus");
  auto corpus_opts = std::make_shared<CorpusOpts>();
  auto dict = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  corpus_opts->add_to(cmd);
  cmd->add_option("--dict", *dict, "dictionary (typically the filtered JSONL)")->required();
  cmd->add_option("-o,--out", *out, "match records (JSONL)")->required();
  cmd->callback([corpus_opts, dict, out] {
    Corpus corpus = corpus_opts->load();
    std::vector<DictEntry> entries = load_dictionary(*dict);
    std::vector<MatchRecord> records = find_matches(corpus, entries);
    write_matches_jsonl(records, *out);
    std::cerr << "wrote " << records.size() << " match records\n";
  });
}

void setup_split(CLI::App& app) {
  auto* cmd = app.add_subcommand("split", "generate the dictionary-driven train/valid/test split");
  auto corpus_opts = std::make_shared<CorpusOpts>();
  auto dict = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(1);
  corpus_opts->add_to(cmd);
  cmd->add_option("--dict", *dict, "filtered dictionary (JSONL)")->required();
  cmd->add_option("--out-dir", *out_dir, "output directory")->required();
  cmd->add_option("--seed", *seed, "split seed (default 1)");
  cmd->callback([corpus_opts, dict, out_dir, seed] {
    Corpus corpus = corpus_opts->load();
    std::vector<DictEntry> entries = load_dictionary(*dict);
    std::vector<MatchRecord> records = find_matches(corpus, entries);
    EntryPartition partition = partition_entries(entries, *seed);
    SplitManifest manifest = assign_sentences(corpus, records, partition, *seed);
    SplitCounts counts = export_split(corpus, manifest, *out_dir);
    std::cerr << "train " << counts.train << ", valid " << counts.valid << ", test "
              << counts.test << ", dropped " << counts.dropped << "\n";
  });
}

void setup_annotate(CLI::App& app) {
  auto* cmd = app.add_subcommand("annotate", "embed dictionary suggestions into source sentences");
  auto input = std::make_shared<std::string>();
  auto matches_path = std::make_shared<std::string>();
  auto dict = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto config = std::make_shared<AnnotationConfig>();
  cmd->add_option("-i,--input", *input, "source file to annotate")->required();
  cmd->add_option("--matches", *matches_path, "match records aligned by sentence_id to the input")
      ->required();
  cmd->add_option("--dict", *dict, "dictionary supplying target lemma phrases")->required();
  cmd->add_option("-o,--out", *out, "annotated output")->required();
  cmd->add_option("--delimiter", config->delimiter, "annotation delimiter token (default '#')");
  cmd->add_flag("--escape", config->escape, "replace in-text delimiters instead of failing");
  cmd->callback([input, matches_path, dict, out, config] {
    std::vector<std::vector<std::string>> lines = read_token_lines(*input);
    std::vector<DictEntry> entries = load_dictionary(*dict);
    EntryIndex index(entries);
    std::vector<std::vector<MatchRecord>> by_sentence(lines.size());
    for (MatchRecord& record : read_matches_jsonl(*matches_path)) {
      if (record.sentence_id < 0 || static_cast<std::size_t>(record.sentence_id) >= lines.size())
        throw DataError("match references sentence " + std::to_string(record.sentence_id) +
                        " outside the input file");
      if (record.src_span) by_sentence[static_cast<std::size_t>(record.sentence_id)]
          .push_back(std::move(record));
    }
    std::vector<std::vector<std::string>> annotated;
    annotated.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::vector<MatchRecord> selected = select_annotation_matches(by_sentence[i]);
      annotated.push_back(annotate_tokens(lines[i], static_cast<int>(i), selected, index,
                                          *config));
    }
    write_lines(annotated, *out);
  });
}

void setup_segment(CLI::App& app) {
  auto* cmd = app.add_subcommand("segment", "apply or reverse a word segmentation scheme");
  auto input = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto scheme_str = std::make_shared<std::string>();
  auto model_path = std::make_shared<std::string>();
  auto learn = std::make_shared<bool>(false);
  auto merges = std::make_shared<std::size_t>(20000);
  auto freq_from = std::make_shared<std::string>();
  auto k = std::make_shared<std::int64_t>(50);
  auto marker = std::make_shared<std::string>("<w>");
  auto delimiter = std::make_shared<std::string>("#");
  auto reverse = std::make_shared<bool>(false);
  auto tolerant = std::make_shared<bool>(false);
  cmd->add_option("-i,--input", *input, "token file to transform")->required();
  cmd->add_option("-o,--out", *out, "output file")->required();
  cmd->add_option("--scheme", *scheme_str, "bpe | chars | mixed | mixed-annot")->required();
  cmd->add_option("--model", *model_path, "BPE merges file (required for --scheme bpe)");
  cmd->add_flag("--learn", *learn, "learn the BPE model before applying and save it to --model");
  cmd->add_option("--merges", *merges, "merge count when learning (default 20000)");
  cmd->add_option("--freq-from", *freq_from,
                  "token file for frequency counts (mixed schemes / BPE learning); "
                  "defaults to the input");
  cmd->add_option("--k", *k, "character threshold for mixed schemes (default 50)");
  cmd->add_option("--marker", *marker, "word boundary marker token (default '<w>')");
  cmd->add_option("--delimiter", *delimiter, "annotation delimiter token (default '#')");
  cmd->add_flag("--reverse", *reverse, "desegment instead of segmenting");
  cmd->add_flag("--tolerant", *tolerant, "repair malformed sequences when reversing");
  cmd->callback([=] {
    Scheme scheme = scheme_from_name(*scheme_str);
    std::vector<std::vector<std::string>> lines = read_token_lines(*input);
    std::vector<std::vector<std::string>> output;
    output.reserve(lines.size());

    if (*reverse) {
      for (const auto& tokens : lines)
        output.push_back(desegment(tokens, scheme, !*tolerant, "@@", *marker));
      write_lines(output, *out);
      return;
    }

    if (scheme == Scheme::Bpe) {
      if (model_path->empty()) throw DataError("--scheme bpe requires --model");
      BpeModel model;
      if (*learn) {
        const std::string& train_path = freq_from->empty() ? *input : *freq_from;
        std::unordered_map<std::string, std::int64_t> freq;
        for (const auto& tokens : read_token_lines(train_path))
          for (const std::string& t : tokens) ++freq[t];
        model = learn_bpe(freq, *merges);
        model.save(*model_path);
        std::cerr << "learned " << model.merges.size() << " merges\n";
      } else {
        model = BpeModel::load(*model_path);
      }
      BpeApplier applier(model);
      for (const auto& tokens : lines) output.push_back(applier.apply(tokens));
    } else if (scheme == Scheme::Chars) {
      for (const auto& tokens : lines) output.push_back(segment_chars(tokens, *marker));
    } else {
      std::unordered_map<std::string, std::int64_t> freq;
      const std::string& train_path = freq_from->empty() ? *input : *freq_from;
      for (const auto& tokens : read_token_lines(train_path))
        for (const std::string& t : tokens) ++freq[t];
      MixConfig mix;
      mix.char_threshold = *k;
      mix.freq_table = &freq;
      mix.word_boundary_marker = *marker;
      mix.annot_all_chars = scheme == Scheme::MixedAnnot;
      mix.delimiter = *delimiter;
      for (const auto& tokens : lines) output.push_back(segment_mixed(tokens, mix));
    }
    write_lines(output, *out);
  });
}

void setup_oracle(CLI::App& app) {
  auto* cmd = app.add_subcommand("oracle", "deterministic pseudo-translator for pipeline checks");
  auto kind_str = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>();
  auto ref = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto delimiter = std::make_shared<std::string>("#");
  cmd->add_option("--kind", *kind_str, "copy | echo | refleak")->required();
  cmd->add_option("-i,--input", *input, "annotated test source")->required();
  cmd->add_option("--ref", *ref, "reference file (required for refleak)");
  cmd->add_option("-o,--out", *out, "hypothesis file to write")->required();
  cmd->add_option("--delimiter", *delimiter, "annotation delimiter token (default '#')");
  cmd->callback([kind_str, input, ref, out, delimiter] {
    OracleKind kind = oracle_kind_from_name(*kind_str);
    std::vector<std::vector<std::string>> sources = read_token_lines(*input);
    std::vector<std::vector<std::string>> refs;
    if (kind == OracleKind::ReferenceLeak) {
      if (ref->empty()) throw DataError("oracle refleak requires --ref");
      refs = read_token_lines(*ref);
      if (refs.size() != sources.size())
        throw DataError("reference line count does not match the annotated source");
    }
    AnnotationConfig config;
    config.delimiter = *delimiter;
    std::vector<std::vector<std::string>> hyps;
    hyps.reserve(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
      std::span<const std::string> ref_line =
          refs.empty() ? std::span<const std::string>() : std::span<const std::string>(refs[i]);
      hyps.push_back(oracle_translate(sources[i], ref_line, kind, config));
    }
    write_lines(hyps, *out);
  });
}

void setup_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand("evaluate", "score a hypothesis file against the split");
  auto hyp = std::make_shared<std::string>();
  auto run_dir = std::make_shared<std::string>();
  auto manifest_path = std::make_shared<std::string>();
  auto matches_path = std::make_shared<std::string>();
  auto dict = std::make_shared<std::string>();
  auto test_ref = std::make_shared<std::string>();
  auto hyp_lemmas_path = std::make_shared<std::string>();
  auto lemma_table_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--hyp", *hyp, "desegmented hypothesis file, aligned with the test set")
      ->required();
  cmd->add_option("--run-dir", *run_dir,
                  "pipeline output directory (supplies manifest, matches, dictionary, test.tgt)");
  cmd->add_option("--manifest", *manifest_path, "manifest.json (overrides --run-dir)");
  cmd->add_option("--matches", *matches_path, "matches.jsonl (overrides --run-dir)");
  cmd->add_option("--dict", *dict, "filtered dictionary (overrides --run-dir)");
  cmd->add_option("--test-ref", *test_ref, "test reference file (overrides --run-dir)");
  cmd->add_option("--hyp-lemmas", *hyp_lemmas_path, "lemma lines aligned with the hypothesis");
  cmd->add_option("--lemma-table", *lemma_table_path, "surface<TAB>lemma fallback table");
  cmd->add_option("-o,--out", *out, "write the report as JSON");
  cmd->callback([=] {
    auto resolve = [&](const std::string& explicit_path, const char* name) {
      if (!explicit_path.empty()) return explicit_path;
      if (run_dir->empty())
        throw DataError(std::string("missing --") + name + " (or provide --run-dir)");
      return (std::filesystem::path(*run_dir) / name).string();
    };
    SplitManifest manifest = read_manifest_json(resolve(*manifest_path, "manifest.json"));
    std::vector<MatchRecord> records = read_matches_jsonl(resolve(*matches_path, "matches.jsonl"));
    std::vector<DictEntry> entries = load_dictionary(resolve(*dict, "filtered.jsonl"));
    std::vector<std::vector<std::string>> refs = read_token_lines(resolve(*test_ref, "test.tgt"));
    std::vector<std::vector<std::string>> hyp_tokens = read_token_lines(*hyp);

    std::vector<int> test_ids;
    for (std::size_t i = 0; i < manifest.sentence_fate.size(); ++i)
      if (manifest.sentence_fate[i] == Fate::Test) test_ids.push_back(static_cast<int>(i));

    std::vector<std::vector<std::string>> hyp_lemmas;
    std::string lemma_source = "identity";
    if (!hyp_lemmas_path->empty()) {
      hyp_lemmas = read_token_lines(*hyp_lemmas_path);
      if (hyp_lemmas.size() != hyp_tokens.size())
        throw DataError("--hyp-lemmas line count does not match the hypothesis");
      lemma_source = "file";
    } else if (!lemma_table_path->empty()) {
      LemmaTable table = LemmaTable::load(*lemma_table_path);
      for (const auto& tokens : hyp_tokens) hyp_lemmas.push_back(lemmatize_fallback(tokens, table));
      lemma_source = "table";
    } else {
      hyp_lemmas = hyp_tokens;
    }

    std::vector<std::string> warnings;
    std::vector<EvalItem> items = build_eval_items(manifest, records, entries, &warnings);
    for (const std::string& warning : warnings) std::cerr << "warning: " << warning << "\n";

    EvalReport report = aggregate(items, hyp_tokens, hyp_lemmas, test_ids, refs);
    report.lemma_source = lemma_source;
    std::cout << format_report_table(report);
    if (!out->empty()) write_report_json(report, *out);
  });
}

void setup_pipeline(CLI::App& app) {
  auto* cmd = app.add_subcommand("pipeline", "run the complete processing pipeline");
  auto config_path = std::make_shared<std::string>();
  auto config = std::make_shared<PipelineConfig>();
  auto scheme_str = std::make_shared<std::string>();
  auto thresholds = std::make_shared<ThresholdOpts>();

  cmd->add_option("--config", *config_path, "JSON config; flags override its fields");
  cmd->add_option("--src", config->src_path, "source corpus");
  cmd->add_option("--tgt", config->tgt_path, "target corpus");
  cmd->add_option("--src-lemmas", config->src_lemma_path, "source lemma file");
  cmd->add_option("--tgt-lemmas", config->tgt_lemma_path, "target lemma file");
  cmd->add_option("--dict", config->dict_path, "bilingual dictionary");
  cmd->add_option("--out-dir", config->out_dir, "output directory");
  cmd->add_option("--seed", config->seed, "master seed (default 1)");
  cmd->add_option("--scheme", *scheme_str, "bpe | chars | mixed | mixed-annot (default mixed)");
  cmd->add_option("--bpe-merges", config->bpe_merges, "BPE merge count (default 20000)");
  cmd->add_flag("--bpe-joint", config->bpe_joint, "learn one BPE model over both sides");
  cmd->add_option("--mix-k", config->mix_k, "mixed-scheme character threshold (default 50)");
  cmd->add_option("--delimiter", config->delimiter, "annotation delimiter (default '#')");
  cmd->add_flag("--escape", config->escape_delimiter, "escape in-text delimiter tokens");
  cmd->add_flag("--add-annot", config->add_annot, "annotate frequent entries in training data");
  thresholds->add_to(cmd);

  cmd->callback([cmd, config_path, config, scheme_str, thresholds] {
    PipelineConfig effective;
    if (!config_path->empty()) effective = PipelineConfig::load(*config_path);
    auto overridden = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (overridden("--src")) effective.src_path = config->src_path;
    if (overridden("--tgt")) effective.tgt_path = config->tgt_path;
    if (overridden("--src-lemmas")) effective.src_lemma_path = config->src_lemma_path;
    if (overridden("--tgt-lemmas")) effective.tgt_lemma_path = config->tgt_lemma_path;
    if (overridden("--dict")) effective.dict_path = config->dict_path;
    if (overridden("--out-dir")) effective.out_dir = config->out_dir;
    if (overridden("--seed")) effective.seed = config->seed;
    if (overridden("--scheme")) effective.scheme = scheme_from_name(*scheme_str);
    if (overridden("--bpe-merges")) effective.bpe_merges = config->bpe_merges;
    if (overridden("--bpe-joint")) effective.bpe_joint = config->bpe_joint;
    if (overridden("--mix-k")) effective.mix_k = config->mix_k;
    if (overridden("--delimiter")) effective.delimiter = config->delimiter;
    if (overridden("--escape")) effective.escape_delimiter = config->escape_delimiter;
    if (overridden("--add-annot")) effective.add_annot = config->add_annot;
    if (overridden("--min-occ")) effective.thresholds.min_occ = thresholds->values.min_occ;
    if (overridden("--max-occ")) effective.thresholds.max_occ = thresholds->values.max_occ;
    if (overridden("--min-variants"))
      effective.thresholds.min_tgt_variants = thresholds->values.min_tgt_variants;
    if (overridden("--max-conflicts"))
      effective.thresholds.max_conflicts = thresholds->values.max_conflicts;

    if (effective.src_path.empty() || effective.tgt_path.empty() ||
        effective.dict_path.empty() || effective.out_dir.empty())
      throw DataError("pipeline requires --src, --tgt, --dict and --out-dir (or a config file)");

    PipelineResult result = run_pipeline(effective);
    std::cerr << "pipeline complete: " << result.sentences << " sentences, "
              << result.filtered_entries << "/" << result.entries << " entries kept, split "
              << result.train << "/" << result.valid << "/" << result.test << " (+"
              << result.dropped << " dropped)\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dictionary-driven corpus splitting, annotation, segmentation and rare-word "
               "evaluation for machine translation"};
  app.require_subcommand(1);

  setup_stats(app);
  setup_filter(app);
  setup_match(app);
  setup_split(app);
  setup_annotate(app);
  setup_segment(app);
  setup_oracle(app);
  setup_evaluate(app);
  setup_pipeline(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const dictmt::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
