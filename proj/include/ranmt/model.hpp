#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranmt/batch.hpp"
#include "ranmt/optim.hpp"
#include "ranmt/tensor.hpp"

namespace ranmt {

struct ModelConfig {
  int embed_dim = 128;
  int hidden_dim = 512;
  int attn_dim = 0;  // 0 -> hidden_dim
  int src_vocab = 0;
  int tgt_vocab = 0;
  double dropout = 0.3;
  double max_decode_factor = 2.0;

  int attn() const { return attn_dim > 0 ? attn_dim : hidden_dim; }
};

// Bidirectional encoder states plus the precomputed attention projections.
struct EncoderStates {
  std::vector<Tensor> states;  // per position, [B x 2H]
  std::vector<Tensor> proj;    // per position, [B x A] (enc side of the score MLP)
  Tensor att_bias;             // [B x T]: 0 on real positions, -1e9 on padding
  Tensor final_fwd, final_bwd;
  int batch = 0, len = 0;
};

struct Hypothesis {
  std::vector<int32_t> ids;  // generated tokens, EOS included when emitted
  double log_prob = 0.0;
  bool finished = false;

  double normalized_score() const {
    return ids.empty() ? log_prob : log_prob / static_cast<double>(ids.size());
  }
};

struct BeamStats {
  int max_active_per_step = 0;
};

// Attentional encoder-decoder: bidirectional LSTM encoder, MLP-scored
// content attention, LSTM decoder fed the previous token embedding, readout
// combining decoder state and context. Parameters live in the given
// ParamStore under fixed names, created on construction (or validated when
// they already exist, e.g. after a checkpoint load).
class Seq2Seq {
 public:
  Seq2Seq(const ModelConfig& config, ParamStore* store, uint64_t init_seed);

  const ModelConfig& config() const { return config_; }

  EncoderStates encode(const TokenMatrix& src, bool train, Rng* dropout_rng) const;
  // context [B x 2H] and attention weights [B x T] for one decoder state
  std::pair<Tensor, Tensor> attend(const Tensor& dec_state, const EncoderStates& enc) const;

  // Mean per-token cross entropy over non-PAD target positions.
  Tensor loss(const TokenMatrix& src, const TokenMatrix& tgt, bool train,
              Rng* dropout_rng) const;

  std::vector<int32_t> greedy_decode(const std::vector<int32_t>& src_ids) const;
  Hypothesis beam_decode(const std::vector<int32_t>& src_ids, int beam,
                         BeamStats* stats = nullptr) const;

  // every parameter name this config implies, in creation order
  static std::vector<std::string> parameter_names(const ModelConfig& config);

 private:
  struct CellRef {
    const Tensor *wx, *wh, *b;
  };
  CellRef cell(const std::string& prefix) const;
  std::pair<Tensor, Tensor> lstm_step(const CellRef& c, const Tensor& x, const Tensor& h,
                                      const Tensor& s) const;
  Tensor decode_logits(const Tensor& h, const Tensor& ctx, Rng* dropout_rng, bool train) const;
  std::pair<Tensor, Tensor> initial_state(const EncoderStates& enc) const;
  int decode_cap(const std::vector<int32_t>& src_ids) const;

  ModelConfig config_;
  ParamStore* store_;
};

}  // namespace ranmt
