#include "ranmt/bleu.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ranmt {

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::istringstream in(lowered);
  std::vector<std::string> toks;
  std::string w;
  while (in >> w) toks.push_back(std::move(w));
  return toks;
}

using NgramCounts = std::unordered_map<std::string, int64_t>;

NgramCounts ngrams(const std::vector<std::string>& toks, int n) {
  NgramCounts counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key = toks[i];
    for (int j = 1; j < n; ++j) {
      key += '\x01';
      key += toks[i + j];
    }
    counts[key] += 1;
  }
  return counts;
}

}  // namespace

BleuReport corpus_bleu(const std::vector<std::string>& hyps,
                       const std::vector<std::string>& refs) {
  if (hyps.size() != refs.size())
    throw std::runtime_error("corpus_bleu: hypothesis/reference count mismatch (" +
                             std::to_string(hyps.size()) + " vs " + std::to_string(refs.size()) +
                             ")");
  if (hyps.empty()) throw std::runtime_error("corpus_bleu: empty input");

  std::array<int64_t, 4> matches{}, totals{};
  int64_t hyp_len = 0, ref_len = 0;
  for (size_t i = 0; i < hyps.size(); ++i) {
    const auto h = tokenize(hyps[i]);
    const auto r = tokenize(refs[i]);
    hyp_len += static_cast<int64_t>(h.size());
    ref_len += static_cast<int64_t>(r.size());
    for (int n = 1; n <= 4; ++n) {
      const auto hc = ngrams(h, n);
      const auto rc = ngrams(r, n);
      for (const auto& [gram, count] : hc) {
        totals[n - 1] += count;
        auto it = rc.find(gram);
        if (it != rc.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  BleuReport rep;
  rep.hyp_tokens = hyp_len;
  rep.ref_tokens = ref_len;
  rep.brevity_penalty =
      hyp_len == 0 ? 0.0
                   : (hyp_len >= ref_len
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(ref_len) / hyp_len));
  bool any_zero = false;
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    rep.precisions[n] = totals[n] > 0 ? static_cast<double>(matches[n]) / totals[n] : 0.0;
    if (matches[n] == 0)
      any_zero = true;
    else
      log_sum += std::log(rep.precisions[n]);
  }
  rep.bleu = any_zero ? 0.0 : rep.brevity_penalty * std::exp(log_sum / 4.0) * 100.0;
  return rep;
}

nlohmann::json BleuReport::to_json() const {
  nlohmann::json j;
  j["bleu"] = bleu;
  j["precisions"] = precisions;
  j["brevity_penalty"] = brevity_penalty;
  j["hyp_tokens"] = hyp_tokens;
  j["ref_tokens"] = ref_tokens;
  return j;
}

std::string BleuReport::summary() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "BLEU = %.2f (%.1f/%.1f/%.1f/%.1f, BP %.3f, hyp %lld, ref %lld)",
                bleu, precisions[0] * 100, precisions[1] * 100, precisions[2] * 100,
                precisions[3] * 100, brevity_penalty, static_cast<long long>(hyp_tokens),
                static_cast<long long>(ref_tokens));
  return buf;
}

}  // namespace ranmt
