#include "ranmt/subword.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ranmt {

const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> specials{"<pad>", "<s>", "</s>", "<unk>"};
  return specials;
}

std::vector<std::string> utf8_codepoints(const std::string& s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    const unsigned char b = s[i];
    size_t len = 1;
    if (b >= 0xf0)
      len = 4;
    else if (b >= 0xe0)
      len = 3;
    else if (b >= 0xc0)
      len = 2;
    if (i + len > s.size()) len = 1;
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream in(line);
  std::string w;
  while (in >> w) words.push_back(std::move(w));
  return words;
}

namespace {

std::vector<std::string> word_to_symbols(const std::string& word) {
  auto cps = utf8_codepoints(word);
  std::vector<std::string> syms;
  syms.reserve(cps.size());
  for (size_t i = 0; i < cps.size(); ++i)
    syms.push_back(i == 0 ? kBoundary + cps[i] : cps[i]);
  return syms;
}

void merge_in_place(std::vector<std::string>& syms, const std::string& left,
                    const std::string& right) {
  size_t w = 0;
  for (size_t r = 0; r < syms.size();) {
    if (r + 1 < syms.size() && syms[r] == left && syms[r + 1] == right) {
      syms[w++] = left + right;
      r += 2;
    } else {
      syms[w++] = std::move(syms[r]);
      r += 1;
    }
  }
  syms.resize(w);
}

}  // namespace

SubwordVocab train_vocab(const std::vector<std::string>& lines, const std::string& lang,
                         int size) {
  // word type -> count; std::map keeps every later iteration deterministic
  std::map<std::string, int64_t> word_counts;
  for (const auto& line : lines)
    for (auto& w : split_words(line)) word_counts[w] += 1;
  if (word_counts.empty()) throw std::runtime_error("train_vocab: empty corpus for " + lang);

  std::vector<std::vector<std::string>> words;
  std::vector<int64_t> counts;
  std::set<std::string> alphabet_syms;  // both bare and boundary-marked forms
  for (const auto& [w, c] : word_counts) {
    auto syms = word_to_symbols(w);
    for (const auto& cp : utf8_codepoints(w)) {
      alphabet_syms.insert(cp);
      alphabet_syms.insert(kBoundary + cp);
    }
    words.push_back(std::move(syms));
    counts.push_back(c);
  }

  SubwordVocab v;
  v.lang = lang;
  v.configured_size = size;
  v.tokens = special_tokens();
  v.tokens.insert(v.tokens.end(), alphabet_syms.begin(), alphabet_syms.end());
  if (static_cast<int>(v.tokens.size()) > size)
    throw std::runtime_error("train_vocab: size " + std::to_string(size) +
                             " too small for alphabet of " + lang + " (needs at least " +
                             std::to_string(v.tokens.size()) + ")");

  std::set<std::string> token_set(v.tokens.begin(), v.tokens.end());
  while (static_cast<int>(v.tokens.size()) < size) {
    std::map<std::pair<std::string, std::string>, int64_t> pair_counts;
    for (size_t i = 0; i < words.size(); ++i) {
      const auto& syms = words[i];
      for (size_t j = 0; j + 1 < syms.size(); ++j)
        pair_counts[{syms[j], syms[j + 1]}] += counts[i];
    }
    if (pair_counts.empty()) break;

    // highest count wins; ties prefer the lexicographically smaller merged
    // string, then the smaller left part
    const std::pair<std::string, std::string>* best = nullptr;
    int64_t best_count = 0;
    std::string best_merged;
    for (const auto& [pr, c] : pair_counts) {
      std::string merged = pr.first + pr.second;
      if (!best || c > best_count || (c == best_count && merged < best_merged)) {
        best = &pr;
        best_count = c;
        best_merged = std::move(merged);
      }
    }

    v.merges.push_back(*best);
    const auto [left, right] = *best;
    for (auto& syms : words) merge_in_place(syms, left, right);
    if (token_set.insert(best_merged).second) v.tokens.push_back(best_merged);
  }
  return v;
}

void save_vocab(const SubwordVocab& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_vocab: cannot write " + path);
  out << "ranmt-vocab 1 " << v.lang << " " << v.configured_size << "\n";
  out << "tokens " << v.tokens.size() << "\n";
  for (const auto& t : v.tokens) out << t << "\n";
  out << "merges " << v.merges.size() << "\n";
  for (const auto& [l, r] : v.merges) out << l << " " << r << "\n";
  if (!out) throw std::runtime_error("save_vocab: write failed for " + path);
}

SubwordVocab load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_vocab: cannot open " + path);
  std::string magic;
  int version = 0;
  SubwordVocab v;
  in >> magic >> version >> v.lang >> v.configured_size;
  if (magic != "ranmt-vocab" || version != 1)
    throw std::runtime_error("load_vocab: " + path + " is not a ranmt vocab file");
  std::string section;
  size_t n = 0;
  in >> section >> n;
  if (section != "tokens") throw std::runtime_error("load_vocab: malformed " + path);
  std::string line;
  std::getline(in, line);
  v.tokens.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("load_vocab: truncated " + path);
    v.tokens.push_back(line);
  }
  in >> section >> n;
  if (section != "merges") throw std::runtime_error("load_vocab: malformed " + path);
  std::getline(in, line);
  for (size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("load_vocab: truncated " + path);
    const size_t sp = line.find(' ');
    if (sp == std::string::npos) throw std::runtime_error("load_vocab: bad merge in " + path);
    v.merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  if (v.tokens.size() < special_tokens().size() ||
      !std::equal(special_tokens().begin(), special_tokens().end(), v.tokens.begin()))
    throw std::runtime_error("load_vocab: specials missing in " + path);
  return v;
}

Segmenter::Segmenter(const SubwordVocab& v) {
  const size_t boundary_len = std::string(kBoundary).size();
  for (size_t i = special_tokens().size(); i < v.tokens.size(); ++i) {
    const std::string& t = v.tokens[i];
    std::string body = t;
    if (t.rfind(kBoundary, 0) == 0) body = t.substr(boundary_len);
    if (utf8_codepoints(body).size() == 1) alphabet_.insert(body);
  }
  merges_ = v.merges;
  for (size_t i = 0; i < merges_.size(); ++i) ranks_[merges_[i]] = static_cast<int>(i);
}

Segmenter::Segmenter(std::set<std::string> alphabet,
                     std::vector<std::pair<std::string, std::string>> merges)
    : alphabet_(std::move(alphabet)), merges_(std::move(merges)) {
  for (size_t i = 0; i < merges_.size(); ++i) ranks_[merges_[i]] = static_cast<int>(i);
}

std::vector<std::string> Segmenter::segment_word(const std::string& word) const {
  auto syms = word_to_symbols(word);
  // repeatedly apply the earliest-learned applicable merge
  while (syms.size() > 1) {
    int best_rank = -1;
    for (size_t j = 0; j + 1 < syms.size(); ++j) {
      auto it = ranks_.find({syms[j], syms[j + 1]});
      if (it != ranks_.end() && (best_rank < 0 || it->second < best_rank)) best_rank = it->second;
    }
    if (best_rank < 0) break;
    merge_in_place(syms, merges_[best_rank].first, merges_[best_rank].second);
  }
  return syms;
}

void UnionVocab::append_tokens(const std::vector<std::string>& toks) {
  for (const auto& t : toks) {
    if (index_.count(t)) continue;
    index_[t] = static_cast<int32_t>(tokens_.size());
    tokens_.push_back(t);
  }
}

UnionVocab UnionVocab::build(const std::vector<SubwordVocab>& vocabs) {
  if (vocabs.empty()) throw std::runtime_error("UnionVocab: need at least one vocab");
  UnionVocab u;
  u.append_tokens(special_tokens());
  for (const auto& v : vocabs) {
    if (const Segmenter* existing = u.find(v.lang)) {
      // exact duplicates are a no-op (union is idempotent); conflicting
      // definitions of one language are an error
      if (existing->merges() != v.merges || Segmenter(v).alphabet() != existing->alphabet())
        throw std::runtime_error("UnionVocab: conflicting vocabularies for language " + v.lang);
      continue;
    }
    u.append_tokens(v.tokens);
    u.segmenters_.emplace_back(v.lang, Segmenter(v));
  }
  return u;
}

UnionVocab UnionVocab::extended(const SubwordVocab& v) const {
  if (has_lang(v.lang))
    throw std::runtime_error("UnionVocab::extended: language already present: " + v.lang);
  UnionVocab u = *this;
  u.append_tokens(v.tokens);
  u.segmenters_.emplace_back(v.lang, Segmenter(v));
  return u;
}

const Segmenter* UnionVocab::find(const std::string& lang) const {
  for (const auto& [l, seg] : segmenters_)
    if (l == lang) return &seg;
  return nullptr;
}

bool UnionVocab::has_lang(const std::string& lang) const { return find(lang) != nullptr; }

std::vector<std::string> UnionVocab::languages() const {
  std::vector<std::string> out;
  for (const auto& [l, seg] : segmenters_) out.push_back(l);
  return out;
}

int32_t UnionVocab::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int32_t> UnionVocab::encode(const std::string& text, const std::string& lang) const {
  const Segmenter* seg = find(lang);
  if (!seg) throw std::runtime_error("UnionVocab::encode: no segmenter for language " + lang);
  const size_t boundary_len = std::string(kBoundary).size();
  std::vector<int32_t> ids{kBosId};
  for (const auto& word : split_words(text)) {
    for (const auto& sym : seg->segment_word(word)) {
      // characters this language never saw stay UNK even if another
      // language contributed the same token string to the union
      std::string body = sym.rfind(kBoundary, 0) == 0 ? sym.substr(boundary_len) : sym;
      if (utf8_codepoints(body).size() == 1 && !seg->alphabet().count(body)) {
        ids.push_back(kUnkId);
        continue;
      }
      auto it = index_.find(sym);
      ids.push_back(it == index_.end() ? kUnkId : it->second);
    }
  }
  ids.push_back(kEosId);
  return ids;
}

std::string UnionVocab::decode(const std::vector<int32_t>& ids) const {
  const size_t boundary_len = std::string(kBoundary).size();
  std::string out;
  for (int32_t id : ids) {
    if (id < 0 || id >= size())
      throw std::runtime_error("UnionVocab::decode: id out of range: " + std::to_string(id));
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    const std::string& t = tokens_[id];
    if (t.rfind(kBoundary, 0) == 0) {
      if (!out.empty()) out += ' ';
      out += t.substr(boundary_len);
    } else {
      out += t;  // continuation piece; UNK decodes to its literal "<unk>"
    }
  }
  return out;
}

nlohmann::json UnionVocab::to_json() const {
  nlohmann::json j;
  j["tokens"] = tokens_;
  nlohmann::json langs = nlohmann::json::array();
  for (const auto& [lang, seg] : segmenters_) {
    nlohmann::json e;
    e["lang"] = lang;
    e["alphabet"] = std::vector<std::string>(seg.alphabet().begin(), seg.alphabet().end());
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& [l, r] : seg.merges()) merges.push_back({l, r});
    e["merges"] = std::move(merges);
    langs.push_back(std::move(e));
  }
  j["languages"] = std::move(langs);
  return j;
}

UnionVocab UnionVocab::from_json(const nlohmann::json& j) {
  UnionVocab u;
  u.append_tokens(j.at("tokens").get<std::vector<std::string>>());
  for (const auto& e : j.at("languages")) {
    std::set<std::string> alphabet;
    for (const auto& a : e.at("alphabet")) alphabet.insert(a.get<std::string>());
    std::vector<std::pair<std::string, std::string>> merges;
    for (const auto& m : e.at("merges"))
      merges.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
    u.segmenters_.emplace_back(e.at("lang").get<std::string>(),
                               Segmenter(std::move(alphabet), std::move(merges)));
  }
  return u;
}

}  // namespace ranmt
