#include "dictmt/corpus.hpp"

#include <fstream>
#include <sstream>

#include "dictmt/error.hpp"
#include "dictmt/text.hpp"

namespace dictmt {

namespace {

std::size_t count_tabs(const std::string& line) {
  std::size_t n = 0;
  for (char c : line)
    if (c == '\t') ++n;
  return n;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      cols.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return cols;
}

enum class LemmaFormat { Lines, TokenLemmaTsv, Conllu };

LemmaFormat sniff_lemma_format(const std::vector<std::string>& lines) {
  std::size_t inspected = 0;
  for (const auto& line : lines) {
    if (line.empty()) continue;
    std::size_t tabs = count_tabs(line);
    if (tabs >= 9) return LemmaFormat::Conllu;
    if (tabs >= 1) return LemmaFormat::TokenLemmaTsv;
    if (line[0] == '#') {
      // Possible CoNLL-U comment; keep looking for a decisive line.
      if (++inspected > 50) break;
      continue;
    }
    return LemmaFormat::Lines;
  }
  return LemmaFormat::Lines;
}

// Parses the lemma file into one lemma sequence per sentence.
std::vector<std::vector<std::string>> parse_lemma_file(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  LemmaFormat format = sniff_lemma_format(lines);

  std::vector<std::vector<std::string>> sentences;
  if (format == LemmaFormat::Lines) {
    for (const auto& line : lines) sentences.push_back(split_whitespace(line));
    // A trailing blank line is file formatting, not an empty sentence.
    while (!sentences.empty() && sentences.back().empty()) sentences.pop_back();
    return sentences;
  }

  std::vector<std::string> current;
  bool in_sentence = false;
  std::size_t lineno = 0;
  for (const auto& line : lines) {
    ++lineno;
    if (line.empty()) {
      if (in_sentence) {
        sentences.push_back(std::move(current));
        current.clear();
        in_sentence = false;
      }
      continue;
    }
    if (line[0] == '#' && format == LemmaFormat::Conllu) continue;
    std::vector<std::string> cols = split_tabs(line);
    if (format == LemmaFormat::Conllu) {
      if (cols.size() < 3)
        throw DataError(path + ":" + std::to_string(lineno) + ": expected CoNLL-U columns");
      // Skip multiword-token ranges and empty nodes; their forms repeat on
      // the following word lines.
      if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos)
        continue;
      current.push_back(cols[2]);
    } else {
      if (cols.size() < 2 || cols[1].empty())
        throw DataError(path + ":" + std::to_string(lineno) + ": expected token<TAB>lemma");
      current.push_back(cols[1]);
    }
    in_sentence = true;
  }
  if (in_sentence) sentences.push_back(std::move(current));
  return sentences;
}

}  // namespace

const char* side_name(Side side) { return side == Side::Source ? "source" : "target"; }

LemmaTable LemmaTable::load(const std::string& path) {
  LemmaTable table;
  std::vector<std::string> lines = read_lines(path);
  std::size_t lineno = 0;
  for (const auto& line : lines) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected surface<TAB>lemma");
    table.add(cols[0], cols[1]);
  }
  return table;
}

void LemmaTable::add(const std::string& surface, const std::string& lemma) {
  entries_[fold_case(surface)] = lemma;
}

std::string LemmaTable::lookup(const std::string& surface) const {
  auto it = entries_.find(fold_case(surface));
  return it == entries_.end() ? surface : it->second;
}

Corpus Corpus::load_parallel(const std::string& src_path, const std::string& tgt_path) {
  std::vector<std::string> src_lines = read_lines(src_path);
  std::vector<std::string> tgt_lines = read_lines(tgt_path);
  if (src_lines.size() != tgt_lines.size()) {
    std::ostringstream msg;
    msg << "line count mismatch: " << src_path << " has " << src_lines.size() << " lines, "
        << tgt_path << " has " << tgt_lines.size();
    throw DataError(msg.str());
  }

  Corpus corpus;
  corpus.pairs_.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    SentencePair pair;
    pair.id = static_cast<int>(i);
    pair.src_tokens = split_whitespace(src_lines[i]);
    pair.tgt_tokens = split_whitespace(tgt_lines[i]);
    if (pair.src_tokens.empty())
      throw DataError(src_path + ":" + std::to_string(i + 1) + ": empty line");
    if (pair.tgt_tokens.empty())
      throw DataError(tgt_path + ":" + std::to_string(i + 1) + ": empty line");
    pair.src_lemmas = pair.src_tokens;
    pair.tgt_lemmas = pair.tgt_tokens;
    corpus.pairs_.push_back(std::move(pair));
  }
  corpus.rebuild_frequencies();
  return corpus;
}

Corpus Corpus::from_pairs(std::vector<SentencePair> pairs) {
  Corpus corpus;
  corpus.pairs_ = std::move(pairs);
  for (std::size_t i = 0; i < corpus.pairs_.size(); ++i) {
    SentencePair& pair = corpus.pairs_[i];
    pair.id = static_cast<int>(i);
    if (pair.src_tokens.empty() || pair.tgt_tokens.empty())
      throw DataError("sentence " + std::to_string(i) + ": empty token sequence");
    for (const std::vector<std::string>* side : {&pair.src_tokens, &pair.tgt_tokens}) {
      for (const std::string& token : *side) {
        if (token.empty() || contains_whitespace(token))
          throw DataError("sentence " + std::to_string(i) + ": token '" + token +
                          "' is empty or contains whitespace");
      }
    }
    if (pair.src_lemmas.empty()) pair.src_lemmas = pair.src_tokens;
    if (pair.tgt_lemmas.empty()) pair.tgt_lemmas = pair.tgt_tokens;
    if (pair.src_lemmas.size() != pair.src_tokens.size() ||
        pair.tgt_lemmas.size() != pair.tgt_tokens.size())
      throw DataError("sentence " + std::to_string(i) + ": token/lemma length mismatch");
  }
  corpus.rebuild_frequencies();
  return corpus;
}

void Corpus::apply_lemma_file(Side side, const std::string& lemma_path) {
  std::vector<std::vector<std::string>> lemmas = parse_lemma_file(lemma_path);
  if (lemmas.size() != pairs_.size()) {
    std::ostringstream msg;
    msg << lemma_path << ": has " << lemmas.size() << " sentences, corpus has " << pairs_.size();
    throw DataError(msg.str());
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const std::vector<std::string>& tokens = pairs_[i].tokens(side);
    if (lemmas[i].size() != tokens.size()) {
      std::ostringstream msg;
      msg << lemma_path << ": sentence " << i << ": " << lemmas[i].size() << " lemmas for "
          << tokens.size() << " tokens";
      throw DataError(msg.str());
    }
    if (side == Side::Source)
      pairs_[i].src_lemmas = std::move(lemmas[i]);
    else
      pairs_[i].tgt_lemmas = std::move(lemmas[i]);
  }
}

void Corpus::apply_lemma_table(Side side, const LemmaTable& table) {
  for (SentencePair& pair : pairs_) {
    std::vector<std::string> lemmas = lemmatize_fallback(pair.tokens(side), table);
    if (side == Side::Source)
      pair.src_lemmas = std::move(lemmas);
    else
      pair.tgt_lemmas = std::move(lemmas);
  }
}

void Corpus::rebuild_frequencies() {
  src_freq_.clear();
  tgt_freq_.clear();
  for (const SentencePair& pair : pairs_) {
    for (const std::string& t : pair.src_tokens) ++src_freq_[t];
    for (const std::string& t : pair.tgt_tokens) ++tgt_freq_[t];
  }
}

std::vector<std::string> lemmatize_fallback(std::span<const std::string> tokens,
                                            const LemmaTable& table) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(table.lookup(t));
  return out;
}

}  // namespace dictmt
