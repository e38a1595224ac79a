#include "ranmt/sampler.hpp"

#include <algorithm>
#include <stdexcept>

#include "ranmt/rng.hpp"

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

const char* batch_origin_name(BatchOrigin o) {
  switch (o) {
    case BatchOrigin::LRL: return "lrl";
    case BatchOrigin::HRL: return "hrl";
    case BatchOrigin::Mixed: return "mixed";
  }
  return "?";
}

SamplingStrategy SamplingStrategy::parse(const std::string& text) {
  SamplingStrategy s;
  if (text == "concat") {
    s.kind = Kind::Concat;
    return s;
  }
  const std::string prefix = "balanced:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string spec = text.substr(prefix.size());
    const size_t dash = spec.find('-');
    if (dash != std::string::npos) {
      try {
        s.kind = Kind::Balanced;
        s.lrl_weight = std::stoi(spec.substr(0, dash));
        s.hrl_weight = std::stoi(spec.substr(dash + 1));
      } catch (...) {
        throw std::runtime_error("bad sampling strategy: " + text);
      }
      if (s.lrl_weight >= 1 && s.hrl_weight >= 1) return s;
    }
  }
  throw std::runtime_error("bad sampling strategy: " + text +
                           " (expected 'concat' or 'balanced:R-S')");
}

std::string SamplingStrategy::to_string() const {
  if (kind == Kind::Concat) return "concat";
  return "balanced:" + std::to_string(lrl_weight) + "-" + std::to_string(hrl_weight);
}

BatchIterator::BatchIterator(const TrainingDataset& ds, const UnionVocab& src_vocab,
                             const UnionVocab& tgt_vocab, SamplingStrategy strategy,
                             int batch_size, uint64_t seed)
    : strategy_(strategy), batch_size_(batch_size), seed_(seed) {
  if (batch_size < 1) throw std::runtime_error("BatchIterator: batch_size must be >= 1");
  if (ds.members.empty()) throw std::runtime_error("BatchIterator: empty dataset");

  const std::string tgt_lang = tgt_vocab.languages().at(0);
  for (const auto& member : ds.members) {
    const bool in_lrl = member.is_lrl;
    const bool in_hrl = member.is_hrl;
    for (const auto& p : member.corpus.pairs) {
      Sentence s;
      s.src = src_vocab.encode(p.src, p.src_lang);
      s.tgt = tgt_vocab.encode(p.tgt, tgt_lang);
      s.lang = p.src_lang;
      const int32_t idx = static_cast<int32_t>(sentences_.size());
      sentences_.push_back(std::move(s));
      pooled_.pool.push_back(idx);
      if (in_lrl) lrl_.pool.push_back(idx);
      if (in_hrl) hrl_.pool.push_back(idx);
    }
  }
  pooled_.name = "pool";
  lrl_.name = "lrl";
  hrl_.name = "hrl";

  if (strategy_.kind == SamplingStrategy::Kind::Balanced) {
    if (lrl_.pool.empty())
      throw std::runtime_error("balanced sampling requires an LRL corpus in the dataset");
    if (hrl_.pool.empty())
      throw std::runtime_error("balanced sampling requires the helper HRL corpus in the dataset");
    if (lrl_.pool.size() + hrl_.pool.size() != pooled_.pool.size())
      throw std::runtime_error(
          "balanced sampling is defined over exactly {LRL, helper HRL} datasets");
  }
}

size_t BatchIterator::pooled_sentences() const { return pooled_.pool.size(); }

int64_t BatchIterator::batches_per_epoch() const {
  return static_cast<int64_t>((pooled_.pool.size() + batch_size_ - 1) / batch_size_);
}

void BatchIterator::build_epoch(Stream& s, int64_t epoch) const {
  s.epoch = epoch;
  s.pos = 0;
  s.batches.clear();

  std::vector<int32_t> order = s.pool;
  Rng rng(seed_, "smp/" + s.name + "/" + std::to_string(epoch));
  rng.shuffle(order);

  // windows of 1024 sorted by source length bound padding waste while the
  // shuffle keeps the stream stochastic
  constexpr size_t kWindow = 1024;
  for (size_t w0 = 0; w0 < order.size(); w0 += kWindow) {
    const size_t w1 = std::min(order.size(), w0 + kWindow);
    std::vector<int32_t> window(order.begin() + w0, order.begin() + w1);
    std::stable_sort(window.begin(), window.end(), [&](int32_t a, int32_t b) {
      return sentences_[a].src.size() < sentences_[b].src.size();
    });
    std::vector<std::vector<int32_t>> slices;
    for (size_t i = 0; i < window.size(); i += batch_size_) {
      const size_t j = std::min(window.size(), i + batch_size_);
      slices.emplace_back(window.begin() + i, window.begin() + j);
    }
    rng.shuffle(slices);
    for (auto& sl : slices) s.batches.push_back(std::move(sl));
  }
}

const std::vector<int32_t>& BatchIterator::next_slice(Stream& s, bool* epoch_end,
                                                      int64_t* epoch_out) {
  if (s.epoch < 0 || s.pos >= s.batches.size()) build_epoch(s, s.epoch + 1);
  const auto& slice = s.batches[s.pos++];
  if (epoch_end) *epoch_end = s.pos == s.batches.size();
  if (epoch_out) *epoch_out = s.epoch;
  return slice;
}

MiniBatch BatchIterator::assemble(const std::vector<int32_t>& idxs, BatchOrigin origin) const {
  std::vector<std::vector<int32_t>> src_rows, tgt_rows;
  MiniBatch b;
  b.origin = origin;
  for (int32_t i : idxs) {
    const auto& s = sentences_[i];
    src_rows.push_back(s.src);
    tgt_rows.push_back(s.tgt);
    b.src_langs.push_back(s.lang);
    b.src_tokens += s.src.size();
    b.tgt_tokens += s.tgt.size();
  }
  b.src = pack_rows(src_rows, kPadId);
  b.tgt = pack_rows(tgt_rows, kPadId);
  return b;
}

MiniBatch BatchIterator::next() {
  if (strategy_.kind == SamplingStrategy::Kind::Concat) {
    bool epoch_end = false;
    int64_t epoch = 0;
    const auto& slice = next_slice(pooled_, &epoch_end, &epoch);
    MiniBatch b = assemble(slice, BatchOrigin::Mixed);
    b.epoch = epoch;
    b.epoch_end = epoch_end;
    return b;
  }
  Rng rng(seed_, "smp/origin");
  rng.set_counter(origin_draws_);
  const bool pick_lrl = rng.bernoulli(strategy_.lrl_fraction());
  origin_draws_ = rng.counter();
  Stream& s = pick_lrl ? lrl_ : hrl_;
  MiniBatch b = assemble(next_slice(s, nullptr, nullptr),
                         pick_lrl ? BatchOrigin::LRL : BatchOrigin::HRL);
  b.epoch = (origin_draws_ - 1) / std::max<int64_t>(1, batches_per_epoch());
  return b;
}

nlohmann::json BatchIterator::state() const {
  nlohmann::json j;
  j["origin_draws"] = origin_draws_;
  for (const Stream* s : {&pooled_, &lrl_, &hrl_}) {
    j[s->name] = {{"epoch", s->epoch}, {"pos", s->pos}};
  }
  return j;
}

void BatchIterator::restore(const nlohmann::json& j) {
  origin_draws_ = j.at("origin_draws").get<uint64_t>();
  for (Stream* s : {&pooled_, &lrl_, &hrl_}) {
    const auto& sj = j.at(s->name);
    const int64_t epoch = sj.at("epoch").get<int64_t>();
    const size_t pos = sj.at("pos").get<size_t>();
    if (epoch >= 0 && !s->pool.empty()) {
      build_epoch(*s, epoch);
      s->pos = pos;
    } else {
      s->epoch = epoch;
      s->pos = pos;
      s->batches.clear();
    }
  }
}

}  // namespace ranmt
