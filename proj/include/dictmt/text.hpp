#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dictmt {

// Splits on ASCII whitespace; never returns empty tokens.
std::vector<std::string> split_whitespace(std::string_view line);

// Splits a UTF-8 string at codepoint boundaries. Bytes that do not form a
// valid sequence become single-byte slices, so concatenating the result
// always reproduces the input exactly.
std::vector<std::string> utf8_split(std::string_view word);

// Lowercases ASCII, Latin-1 supplement and Latin Extended-A codepoints;
// everything else passes through unchanged. Enough for the Latin-script
// corpora this toolkit targets.
std::string fold_case(std::string_view text);

std::string join(std::span<const std::string> tokens, std::string_view sep = " ");

bool contains_whitespace(std::string_view s);

// True iff `needle` occurs as a contiguous subsequence of `haystack`.
bool contains_subsequence(std::span<const std::string> haystack,
                          std::span<const std::string> needle);

// Whole file as lines, tolerating a trailing newline and CRLF endings.
std::vector<std::string> read_lines(const std::string& path);

// Lines split into tokens; empty lines become empty token sequences.
std::vector<std::vector<std::string>> read_token_lines(const std::string& path);

// FNV-1a over raw bytes; used for artifact content digests.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::string& path);
std::string to_hex(std::uint64_t value);

}  // namespace dictmt
