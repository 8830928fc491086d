#include "dictmt/oracle.hpp"

#include "dictmt/error.hpp"

namespace dictmt {

OracleKind oracle_kind_from_name(const std::string& name) {
  if (name == "copy") return OracleKind::CopyAnnotation;
  if (name == "echo") return OracleKind::EchoSource;
  if (name == "refleak") return OracleKind::ReferenceLeak;
  throw DataError("unknown oracle kind: " + name + " (expected copy|echo|refleak)");
}

std::vector<std::string> oracle_translate(std::span<const std::string> annotated_src,
                                          std::span<const std::string> ref, OracleKind kind,
                                          const AnnotationConfig& config) {
  switch (kind) {
    case OracleKind::ReferenceLeak:
      return {ref.begin(), ref.end()};
    case OracleKind::EchoSource:
      return strip_annotation(annotated_src, config).tokens;
    case OracleKind::CopyAnnotation: {
      // Walk the annotation triples, emitting the target lemma phrase in
      // place of each annotated source span.
      std::vector<std::string> out;
      std::size_t i = 0;
      while (i < annotated_src.size()) {
        if (annotated_src[i] != config.delimiter) {
          out.push_back(annotated_src[i]);
          ++i;
          continue;
        }
        std::size_t j = i + 1;
        while (j < annotated_src.size() && annotated_src[j] != config.delimiter) ++j;
        if (j >= annotated_src.size() || j == i + 1)
          throw DataError("oracle: unbalanced annotation at token " + std::to_string(i));
        std::size_t k = j + 1;
        while (k < annotated_src.size() && annotated_src[k] != config.delimiter) {
          out.push_back(annotated_src[k]);
          ++k;
        }
        if (k >= annotated_src.size() || k == j + 1)
          throw DataError("oracle: unbalanced annotation at token " + std::to_string(j));
        i = k + 1;
      }
      return out;
    }
  }
  throw DataError("unknown oracle kind");
}

}  // namespace dictmt
