#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dictmt/dictionary.hpp"
#include "dictmt/segmenter.hpp"

namespace dictmt {

// Everything a full run needs; serializes to a single JSON config whose
// fields map 1:1 onto CLI flags.
struct PipelineConfig {
  std::string src_path;
  std::string tgt_path;
  std::string src_lemma_path;  // optional; empty means identity lemmas
  std::string tgt_lemma_path;
  std::string dict_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  FilterThresholds thresholds;
  Scheme scheme = Scheme::Mixed;
  std::size_t bpe_merges = 20000;
  bool bpe_joint = false;
  std::int64_t mix_k = 50;
  std::string delimiter = "#";
  bool escape_delimiter = false;
  bool add_annot = false;

  std::string to_json_string() const;
  static PipelineConfig from_json_string(const std::string& text);
  static PipelineConfig load(const std::string& path);
  void save(const std::string& path) const;
};

struct PipelineResult {
  std::size_t sentences = 0;
  std::size_t entries = 0;
  std::size_t filtered_entries = 0;
  std::size_t matches = 0;
  std::size_t extra_matches = 0;
  std::size_t train = 0, valid = 0, test = 0, dropped = 0;
  std::size_t annotated_train = 0, annotated_valid = 0, annotated_test = 0;
  // artifact file name -> fnv1a64 content digest (hex)
  std::map<std::string, std::string> digests;
};

// stats -> filter -> match -> partition -> assign -> export -> annotate ->
// segment, writing every intermediate artifact plus run.json. Any stage
// failure writes an incomplete-run marker into run.json and rethrows with
// the stage name.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace dictmt
