#include "ranmt/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranmt {

TokenMatrix pack_rows(const std::vector<std::vector<int32_t>>& rows_in, int32_t pad_id) {
  TokenMatrix m;
  m.rows = static_cast<int>(rows_in.size());
  size_t width = 0;
  for (const auto& r : rows_in) width = std::max(width, r.size());
  m.cols = static_cast<int>(width);
  m.ids.assign(static_cast<size_t>(m.rows) * m.cols, pad_id);
  m.mask.assign(m.ids.size(), 0);
  for (int r = 0; r < m.rows; ++r)
    for (size_t c = 0; c < rows_in[r].size(); ++c) {
      m.ids[static_cast<size_t>(r) * m.cols + c] = rows_in[r][c];
      m.mask[static_cast<size_t>(r) * m.cols + c] = 1;
    }
  return m;
}

namespace {

// Special ids, mirrored from the vocabulary layout (subword module); the
// numeric core does not depend on the toolkit so they are restated here.
constexpr int32_t kPad = 0;
constexpr int32_t kBos = 1;
constexpr int32_t kEos = 2;

constexpr real_t kMaskBias = real_t(-1e9);

std::vector<int32_t> column_ids(const TokenMatrix& m, int c) {
  std::vector<int32_t> ids(m.rows);
  for (int r = 0; r < m.rows; ++r) ids[r] = m.id(r, c);
  return ids;
}

}  // namespace

std::vector<std::string> Seq2Seq::parameter_names(const ModelConfig& config) {
  (void)config;
  std::vector<std::string> names{"src_embed", "tgt_embed"};
  for (const char* dir : {"enc.fwd", "enc.bwd"}) {
    names.push_back(std::string(dir) + ".Wx");
    names.push_back(std::string(dir) + ".Wh");
    names.push_back(std::string(dir) + ".b");
  }
  for (const char* p : {"dec.init_h.W", "dec.init_h.b", "dec.init_c.W", "dec.init_c.b",
                        "dec.cell.Wx", "dec.cell.Wh", "dec.cell.b", "att.enc_W", "att.dec_W",
                        "att.b", "att.v", "out.readout_W", "out.readout_b", "out.W", "out.b"})
    names.push_back(p);
  return names;
}

Seq2Seq::Seq2Seq(const ModelConfig& config, ParamStore* store, uint64_t init_seed)
    : config_(config), store_(store) {
  if (config.src_vocab <= 0 || config.tgt_vocab <= 0)
    throw std::runtime_error("Seq2Seq: vocabulary sizes must be set");
  if (config.embed_dim <= 0 || config.hidden_dim <= 0)
    throw std::runtime_error("Seq2Seq: dimensions must be positive");
  if (config.dropout < 0.0 || config.dropout >= 1.0)
    throw std::runtime_error("Seq2Seq: dropout must be in [0, 1)");

  const int e = config.embed_dim, h = config.hidden_dim, a = config.attn();
  struct Spec {
    const char* name;
    int rows, cols;
    Init init;
  };
  const Spec specs[] = {
      {"src_embed", config.src_vocab, e, Init::EmbedUniform},
      {"tgt_embed", config.tgt_vocab, e, Init::EmbedUniform},
      {"enc.fwd.Wx", e, 4 * h, Init::Glorot},
      {"enc.fwd.Wh", h, 4 * h, Init::Glorot},
      {"enc.fwd.b", 1, 4 * h, Init::Zero},
      {"enc.bwd.Wx", e, 4 * h, Init::Glorot},
      {"enc.bwd.Wh", h, 4 * h, Init::Glorot},
      {"enc.bwd.b", 1, 4 * h, Init::Zero},
      {"dec.init_h.W", 2 * h, h, Init::Glorot},
      {"dec.init_h.b", 1, h, Init::Zero},
      {"dec.init_c.W", 2 * h, h, Init::Glorot},
      {"dec.init_c.b", 1, h, Init::Zero},
      {"dec.cell.Wx", e, 4 * h, Init::Glorot},
      {"dec.cell.Wh", h, 4 * h, Init::Glorot},
      {"dec.cell.b", 1, 4 * h, Init::Zero},
      {"att.enc_W", 2 * h, a, Init::Glorot},
      {"att.dec_W", h, a, Init::Glorot},
      {"att.b", 1, a, Init::Zero},
      {"att.v", a, 1, Init::Glorot},
      {"out.readout_W", 3 * h, h, Init::Glorot},
      {"out.readout_b", 1, h, Init::Zero},
      {"out.W", h, config.tgt_vocab, Init::Glorot},
      {"out.b", 1, config.tgt_vocab, Init::Zero},
  };
  for (const auto& s : specs) {
    if (store_->has(s.name)) {
      const auto& p = store_->get(s.name);
      if (p.value.rows() != s.rows || p.value.cols() != s.cols)
        throw std::runtime_error(std::string("Seq2Seq: parameter ") + s.name +
                                 " has unexpected shape for this config");
    } else {
      store_->create(s.name, s.rows, s.cols, s.init, init_seed);
    }
  }
}

Seq2Seq::CellRef Seq2Seq::cell(const std::string& prefix) const {
  return {&store_->get(prefix + ".Wx").value, &store_->get(prefix + ".Wh").value,
          &store_->get(prefix + ".b").value};
}

std::pair<Tensor, Tensor> Seq2Seq::lstm_step(const CellRef& c, const Tensor& x, const Tensor& h,
                                             const Tensor& s) const {
  const int hd = config_.hidden_dim;
  Tensor gates = add(add(matmul(x, *c.wx), matmul(h, *c.wh)), *c.b);
  Tensor in_g = sigmoid_t(slice_cols(gates, 0, hd));
  Tensor forget_g = sigmoid_t(slice_cols(gates, hd, 2 * hd));
  Tensor cand = tanh_t(slice_cols(gates, 2 * hd, 3 * hd));
  Tensor out_g = sigmoid_t(slice_cols(gates, 3 * hd, 4 * hd));
  Tensor s2 = add(mul(forget_g, s), mul(in_g, cand));
  Tensor h2 = mul(out_g, tanh_t(s2));
  return {h2, s2};
}

EncoderStates Seq2Seq::encode(const TokenMatrix& src, bool train, Rng* dropout_rng) const {
  if (src.rows == 0 || src.cols == 0) throw std::runtime_error("encode: empty batch");
  for (int32_t id : src.ids)
    if (id < 0 || id >= config_.src_vocab)
      throw std::runtime_error("encode: source id out of vocabulary range");

  const int b = src.rows, t_len = src.cols, h = config_.hidden_dim;
  const Tensor& emb_table = store_->get("src_embed").value;
  const double p = train ? config_.dropout : 0.0;

  // per-timestep embeddings and 0/1 state-update masks
  std::vector<Tensor> xs(t_len);
  std::vector<Tensor> keep(t_len), inv_keep(t_len);
  for (int t = 0; t < t_len; ++t) {
    Tensor x = gather_rows(emb_table, column_ids(src, t));
    if (p > 0) x = dropout(x, p, *dropout_rng);
    xs[t] = x;
    Tensor m = Tensor::zeros(b, 1);
    Tensor im = Tensor::zeros(b, 1);
    for (int r = 0; r < b; ++r) {
      m.at(r, 0) = src.real(r, t) ? real_t(1) : real_t(0);
      im.at(r, 0) = src.real(r, t) ? real_t(0) : real_t(1);
    }
    keep[t] = m;
    inv_keep[t] = im;
  }

  // padded positions hold the previous state so the last forward state (and
  // the first backward state) always reflect each row's real tokens
  auto run_direction = [&](const CellRef& c, bool backward) {
    std::vector<Tensor> states(t_len);
    Tensor hh = Tensor::zeros(b, h);
    Tensor ss = Tensor::zeros(b, h);
    for (int i = 0; i < t_len; ++i) {
      const int t = backward ? t_len - 1 - i : i;
      auto [h2, s2] = lstm_step(c, xs[t], hh, ss);
      hh = add(mul(h2, keep[t]), mul(hh, inv_keep[t]));
      ss = add(mul(s2, keep[t]), mul(ss, inv_keep[t]));
      states[t] = hh;
    }
    return states;
  };
  auto fwd = run_direction(cell("enc.fwd"), false);
  auto bwd = run_direction(cell("enc.bwd"), true);

  EncoderStates enc;
  enc.batch = b;
  enc.len = t_len;
  enc.final_fwd = fwd[t_len - 1];
  enc.final_bwd = bwd[0];
  const Tensor& att_enc = store_->get("att.enc_W").value;
  enc.att_bias = Tensor::zeros(b, t_len);
  for (int r = 0; r < b; ++r)
    for (int t = 0; t < t_len; ++t)
      if (!src.real(r, t)) enc.att_bias.at(r, t) = kMaskBias;
  enc.states.reserve(t_len);
  enc.proj.reserve(t_len);
  for (int t = 0; t < t_len; ++t) {
    Tensor st = concat_cols({fwd[t], bwd[t]});
    enc.proj.push_back(matmul(st, att_enc));
    enc.states.push_back(std::move(st));
  }
  return enc;
}

std::pair<Tensor, Tensor> Seq2Seq::attend(const Tensor& dec_state,
                                          const EncoderStates& enc) const {
  if (enc.len == 0) throw std::runtime_error("attend: empty encoder states");
  const Tensor& att_dec = store_->get("att.dec_W").value;
  const Tensor& att_b = store_->get("att.b").value;
  const Tensor& att_v = store_->get("att.v").value;

  Tensor q = add(matmul(dec_state, att_dec), att_b);  // [B x A]
  std::vector<Tensor> scores;
  scores.reserve(enc.len);
  for (int t = 0; t < enc.len; ++t)
    scores.push_back(matmul(tanh_t(add(enc.proj[t], q)), att_v));  // [B x 1]
  Tensor weights = softmax(add(concat_cols(scores), enc.att_bias), 1);
  Tensor ctx = weighted_sum_cols(enc.states, weights);
  return {ctx, weights};
}

std::pair<Tensor, Tensor> Seq2Seq::initial_state(const EncoderStates& enc) const {
  Tensor joined = concat_cols({enc.final_fwd, enc.final_bwd});
  Tensor h0 = tanh_t(add(matmul(joined, store_->get("dec.init_h.W").value),
                         store_->get("dec.init_h.b").value));
  Tensor c0 = tanh_t(add(matmul(joined, store_->get("dec.init_c.W").value),
                         store_->get("dec.init_c.b").value));
  return {h0, c0};
}

Tensor Seq2Seq::decode_logits(const Tensor& h, const Tensor& ctx, Rng* dropout_rng,
                              bool train) const {
  Tensor readout = tanh_t(add(matmul(concat_cols({h, ctx}), store_->get("out.readout_W").value),
                              store_->get("out.readout_b").value));
  if (train && config_.dropout > 0) readout = dropout(readout, config_.dropout, *dropout_rng);
  return add(matmul(readout, store_->get("out.W").value), store_->get("out.b").value);
}

Tensor Seq2Seq::loss(const TokenMatrix& src, const TokenMatrix& tgt, bool train,
                     Rng* dropout_rng) const {
  if (src.rows == 0 || tgt.rows == 0) throw std::runtime_error("loss: empty batch");
  if (src.rows != tgt.rows) throw std::runtime_error("loss: src/tgt row counts differ");
  if (tgt.cols < 2) throw std::runtime_error("loss: target needs BOS and EOS");

  EncoderStates enc = encode(src, train, dropout_rng);
  auto [h, c] = initial_state(enc);
  const Tensor& emb_table = store_->get("tgt_embed").value;
  const CellRef dec = cell("dec.cell");
  const double p = train ? config_.dropout : 0.0;

  std::vector<Tensor> ce_terms;
  int64_t total_count = 0;
  for (int t = 0; t + 1 < tgt.cols; ++t) {
    Tensor x = gather_rows(emb_table, column_ids(tgt, t));
    if (p > 0) x = dropout(x, p, *dropout_rng);
    std::tie(h, c) = lstm_step(dec, x, h, c);
    auto [ctx, weights] = attend(h, enc);
    Tensor logits = decode_logits(h, ctx, dropout_rng, train);
    int count = 0;
    ce_terms.push_back(cross_entropy_sum(logits, column_ids(tgt, t + 1), kPad, &count));
    total_count += count;
  }
  if (total_count == 0) throw std::runtime_error("loss: no target tokens");
  return scale(add_n(ce_terms), static_cast<real_t>(1.0 / total_count));
}

int Seq2Seq::decode_cap(const std::vector<int32_t>& src_ids) const {
  int content = 0;
  for (int32_t id : src_ids)
    if (id != kPad && id != kBos && id != kEos) ++content;
  return static_cast<int>(config_.max_decode_factor * content) + 10;
}

std::vector<int32_t> Seq2Seq::greedy_decode(const std::vector<int32_t>& src_ids) const {
  return beam_decode(src_ids, 1).ids;
}

Hypothesis Seq2Seq::beam_decode(const std::vector<int32_t>& src_ids, int beam,
                                BeamStats* stats) const {
  if (beam < 1) throw std::runtime_error("beam_decode: beam must be >= 1");
  if (src_ids.empty()) throw std::runtime_error("beam_decode: empty source");
  NoGrad ng;

  TokenMatrix src = pack_rows({src_ids}, kPad);
  EncoderStates enc = encode(src, false, nullptr);
  auto [h0, c0] = initial_state(enc);
  const Tensor& emb_table = store_->get("tgt_embed").value;
  const CellRef dec = cell("dec.cell");
  const int cap = decode_cap(src_ids);
  const int vocab = config_.tgt_vocab;

  struct Beam {
    Hypothesis hyp;
    Tensor h, c;
  };
  std::vector<Beam> active{{Hypothesis{}, h0, c0}};
  std::vector<Hypothesis> finished;

  for (int step = 0; step < cap && !active.empty(); ++step) {
    if (stats) stats->max_active_per_step = std::max(stats->max_active_per_step,
                                                     static_cast<int>(active.size()));
    struct Cand {
      size_t parent;
      int32_t id;
      double log_prob;
    };
    std::vector<Cand> cands;
    std::vector<std::pair<Tensor, Tensor>> next_states(active.size());
    for (size_t i = 0; i < active.size(); ++i) {
      const int32_t prev = active[i].hyp.ids.empty() ? kBos : active[i].hyp.ids.back();
      Tensor x = gather_rows(emb_table, {prev});
      auto [h, c] = lstm_step(dec, x, active[i].h, active[i].c);
      auto [ctx, weights] = attend(h, enc);
      Tensor logits = decode_logits(h, ctx, nullptr, false);
      next_states[i] = {h, c};

      // log-softmax in double for stable cumulative scores
      const auto& row = logits.data();
      double mx = row[0];
      for (int v = 1; v < vocab; ++v) mx = std::max(mx, static_cast<double>(row[v]));
      double lse = 0;
      for (int v = 0; v < vocab; ++v) lse += std::exp(static_cast<double>(row[v]) - mx);
      lse = std::log(lse) + mx;

      // top-`beam` continuations of this hypothesis; ties prefer smaller ids
      std::vector<int32_t> order(vocab);
      for (int v = 0; v < vocab; ++v) order[v] = v;
      const int keep = std::min(beam, vocab);
      std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                        [&](int32_t a, int32_t b) {
                          if (row[a] != row[b]) return row[a] > row[b];
                          return a < b;
                        });
      for (int k = 0; k < keep; ++k)
        cands.push_back({i, order[k],
                         active[i].hyp.log_prob + static_cast<double>(row[order[k]]) - lse});
    }

    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      return a.log_prob > b.log_prob;
    });

    // keep the best `beam` candidates; completed ones leave the beam
    std::vector<Beam> next;
    int taken = 0;
    for (const Cand& cand : cands) {
      if (taken >= beam) break;
      ++taken;
      Hypothesis hyp = active[cand.parent].hyp;
      hyp.ids.push_back(cand.id);
      hyp.log_prob = cand.log_prob;
      if (cand.id == kEos || static_cast<int>(hyp.ids.size()) >= cap) {
        hyp.finished = true;
        finished.push_back(std::move(hyp));
      } else {
        next.push_back({std::move(hyp), next_states[cand.parent].first,
                        next_states[cand.parent].second});
      }
    }
    active = std::move(next);
  }

  // the greedy chain is part of the explored set, so the final answer never
  // scores below greedy under the shared normalization
  if (beam > 1) finished.push_back(beam_decode(src_ids, 1));
  if (finished.empty()) return Hypothesis{{}, 0.0, true};

  const Hypothesis* best = &finished[0];
  for (const auto& h : finished)
    if (h.normalized_score() > best->normalized_score()) best = &h;
  return *best;
}

}  // namespace ranmt
