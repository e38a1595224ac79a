#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ranmt {

// Corpus-level BLEU-4: clipped n-gram precision summed over the corpus,
// geometric mean, brevity penalty. Text is ASCII-lowercased and whitespace
// tokenized; a corpus with zero 4-gram matches scores 0 (no smoothing).
struct BleuReport {
  double bleu = 0.0;
  std::array<double, 4> precisions{};
  double brevity_penalty = 0.0;
  int64_t hyp_tokens = 0;
  int64_t ref_tokens = 0;

  nlohmann::json to_json() const;
  std::string summary() const;
};

BleuReport corpus_bleu(const std::vector<std::string>& hyps,
                       const std::vector<std::string>& refs);

}  // namespace ranmt
