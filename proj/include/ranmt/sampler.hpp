#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ranmt/batch.hpp"
#include "ranmt/corpus.hpp"
#include "ranmt/subword.hpp"

namespace ranmt {

// concat: pool everything, every sentence exactly once per epoch.
// balanced:R-S: each batch drawn whole from the LRL stream with probability
// R/(R+S), otherwise from the HRL stream (the paper's balanced sampling).
struct SamplingStrategy {
  enum class Kind { Concat, Balanced };
  Kind kind = Kind::Concat;
  int lrl_weight = 1, hrl_weight = 1;

  static SamplingStrategy parse(const std::string& text);
  std::string to_string() const;
  double lrl_fraction() const {
    return static_cast<double>(lrl_weight) / (lrl_weight + hrl_weight);
  }
};

// Deterministic, seeded stream of minibatches. Sentences are encoded once at
// construction; per epoch each origin shuffles its pool, sorts windows of
// 1024 by source length, slices them into batches and shuffles the slice
// order. State is a pure function of (seed, counters), so it serializes to a
// few integers and a restored iterator continues the exact stream.
class BatchIterator {
 public:
  BatchIterator(const TrainingDataset& ds, const UnionVocab& src_vocab,
                const UnionVocab& tgt_vocab, SamplingStrategy strategy, int batch_size,
                uint64_t seed);

  MiniBatch next();

  nlohmann::json state() const;
  void restore(const nlohmann::json& j);

  size_t pooled_sentences() const;
  // batches per pseudo-epoch (for logging comparability across strategies)
  int64_t batches_per_epoch() const;

 private:
  struct Sentence {
    std::vector<int32_t> src, tgt;
    std::string lang;
  };
  struct Stream {
    std::string name;
    std::vector<int32_t> pool;  // sentence indices
    int64_t epoch = -1;
    size_t pos = 0;                            // next batch within the epoch
    std::vector<std::vector<int32_t>> batches;  // current epoch's batches
  };

  void build_epoch(Stream& s, int64_t epoch) const;
  const std::vector<int32_t>& next_slice(Stream& s, bool* epoch_end, int64_t* epoch_out);
  MiniBatch assemble(const std::vector<int32_t>& idxs, BatchOrigin origin) const;

  std::vector<Sentence> sentences_;
  SamplingStrategy strategy_;
  int batch_size_ = 32;
  uint64_t seed_ = 0;
  Stream pooled_, lrl_, hrl_;
  uint64_t origin_draws_ = 0;
};

}  // namespace ranmt
