#pragma once

#include <span>
#include <string>
#include <vector>

#include "dictmt/annotator.hpp"

namespace dictmt {

// Deterministic pseudo-translators that stand in for a trained system so the
// evaluation path can be exercised with known outcomes.
enum class OracleKind {
  CopyAnnotation,  // replace each annotated region by its target lemma phrase
  EchoSource,      // emit the stripped source unchanged
  ReferenceLeak,   // emit the reference verbatim
};

OracleKind oracle_kind_from_name(const std::string& name);

std::vector<std::string> oracle_translate(std::span<const std::string> annotated_src,
                                          std::span<const std::string> ref, OracleKind kind,
                                          const AnnotationConfig& config = {});

}  // namespace dictmt
