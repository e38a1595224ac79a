#include "ranmt/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ranmt/rng.hpp"
#include "ranmt/subword.hpp"

namespace fs = std::filesystem;

namespace ranmt {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "dev") return Split::Dev;
  if (name == "test") return Split::Test;
  throw std::runtime_error("unknown split: " + name);
}

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

size_t count_tokens(const std::string& s) {
  std::istringstream in(s);
  std::string w;
  size_t n = 0;
  while (in >> w) ++n;
  return n;
}

void validate_lang_code(const std::string& code) {
  if (code.empty()) throw std::runtime_error("manifest: empty language code");
  for (char c : code)
    if (!std::islower(static_cast<unsigned char>(c)) && !std::isdigit(static_cast<unsigned char>(c)))
      throw std::runtime_error("manifest: language code must be lowercase ASCII: " + code);
}

}  // namespace

ParallelCorpus load_corpus(const std::string& src_path, const std::string& tgt_path,
                           const std::string& src_lang, Split split, int max_len) {
  auto src_lines = read_lines(src_path);
  auto tgt_lines = read_lines(tgt_path);
  if (src_lines.empty() || tgt_lines.empty())
    throw std::runtime_error("empty corpus file: " + (src_lines.empty() ? src_path : tgt_path));
  if (src_lines.size() != tgt_lines.size())
    throw std::runtime_error("line count mismatch: " + src_path + " has " +
                             std::to_string(src_lines.size()) + " lines, " + tgt_path + " has " +
                             std::to_string(tgt_lines.size()));

  ParallelCorpus c;
  c.src_lang = src_lang;
  c.split = split;
  c.pairs.reserve(src_lines.size());
  for (size_t i = 0; i < src_lines.size(); ++i) {
    std::string s = trim(src_lines[i]);
    std::string t = trim(tgt_lines[i]);
    if (s.empty() || t.empty()) {
      ++c.dropped_empty;
      continue;
    }
    if (count_tokens(s) > static_cast<size_t>(max_len) ||
        count_tokens(t) > static_cast<size_t>(max_len)) {
      ++c.dropped_overlong;
      continue;
    }
    c.pairs.push_back({std::move(s), std::move(t), src_lang});
  }
  if (c.pairs.empty()) throw std::runtime_error("no usable pairs in " + src_path);
  return c;
}

Manifest Manifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j, fs::path(path).parent_path().string());
}

Manifest Manifest::from_json(const nlohmann::json& j, const std::string& base_dir) {
  Manifest m;
  m.target_lang = j.value("target", "eng");
  std::set<std::string> seen;
  for (const auto& e : j.at("languages")) {
    ManifestEntry entry;
    entry.code = e.at("code").get<std::string>();
    validate_lang_code(entry.code);
    if (!seen.insert(entry.code).second)
      throw std::runtime_error("manifest: duplicate language " + entry.code);
    const std::string role = e.value("role", "other");
    if (role == "lrl") {
      entry.role = Role::LRL;
      entry.helper = e.at("helper").get<std::string>();
    } else if (role == "hrl") {
      entry.role = Role::HRL;
    } else if (role == "other") {
      entry.role = Role::Other;
    } else {
      throw std::runtime_error("manifest: unknown role " + role);
    }
    for (Split s : {Split::Train, Split::Dev, Split::Test}) {
      const char* name = split_name(s);
      if (!e.contains(name)) continue;
      const auto& sp = e.at(name);
      auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (fs::path(base_dir) / fp).string();
      };
      entry.paths[s] = {resolve(sp.at("src").get<std::string>()),
                        resolve(sp.at("tgt").get<std::string>())};
    }
    m.entries.push_back(std::move(entry));
  }
  // helper references must resolve
  for (const auto& e : m.entries)
    if (e.role == Role::LRL && !m.has(e.helper))
      throw std::runtime_error("manifest: helper " + e.helper + " of " + e.code + " not present");
  return m;
}

const ManifestEntry& Manifest::entry(const std::string& code) const {
  for (const auto& e : entries)
    if (e.code == code) return e;
  throw std::runtime_error("manifest: language not present: " + code);
}

bool Manifest::has(const std::string& code) const {
  for (const auto& e : entries)
    if (e.code == code) return true;
  return false;
}

const std::string& Manifest::helper_of(const std::string& lrl) const {
  const auto& e = entry(lrl);
  if (e.role != Role::LRL || e.helper.empty())
    throw std::runtime_error("manifest: " + lrl + " has no helper pairing");
  return e.helper;
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Sing: return "Sing";
    case Strategy::Bi: return "Bi";
    case Strategy::All: return "All";
  }
  return "?";
}

Strategy strategy_from_name(const std::string& name) {
  std::string n;
  for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "sing") return Strategy::Sing;
  if (n == "bi") return Strategy::Bi;
  if (n == "all") return Strategy::All;
  throw std::runtime_error("unknown strategy: " + name);
}

size_t TrainingDataset::total_sentences() const {
  size_t n = 0;
  for (const auto& m : members) n += m.corpus.pairs.size();
  return n;
}

std::vector<std::string> TrainingDataset::languages() const {
  std::vector<std::string> out;
  for (const auto& m : members) out.push_back(m.corpus.src_lang);
  return out;
}

TrainingDataset build_dataset(const Manifest& manifest, Strategy strategy, const std::string& lrl,
                              bool cold_start) {
  if (!manifest.has(lrl)) throw std::runtime_error("build_dataset: LRL not in manifest: " + lrl);
  if (strategy == Strategy::Sing && cold_start)
    throw std::runtime_error("build_dataset: Sing with cold start would contain no data");

  const std::string helper =
      manifest.entry(lrl).role == Role::LRL ? manifest.helper_of(lrl) : std::string();

  std::vector<std::string> langs;
  switch (strategy) {
    case Strategy::Sing:
      langs = {lrl};
      break;
    case Strategy::Bi:
      if (helper.empty()) throw std::runtime_error("build_dataset: Bi needs a helper for " + lrl);
      langs = {lrl, helper};
      break;
    case Strategy::All:
      for (const auto& e : manifest.entries) langs.push_back(e.code);
      break;
  }

  TrainingDataset ds;
  ds.lrl = lrl;
  ds.provenance = strategy_name(strategy) + std::string(cold_start ? "-" : "");
  for (const auto& code : langs) {
    if (cold_start && code == lrl) continue;
    const auto& entry = manifest.entry(code);
    if (!entry.has_split(Split::Train)) {
      if (code == lrl)
        throw std::runtime_error("build_dataset: LRL " + lrl + " has no train split");
      continue;  // All: languages without train data are skipped
    }
    const auto& [src, tgt] = entry.paths.at(Split::Train);
    DatasetMember m;
    m.corpus = load_corpus(src, tgt, code, Split::Train);
    m.is_lrl = code == lrl;
    m.is_hrl = !helper.empty() && code == helper;
    ds.members.push_back(std::move(m));
  }
  if (ds.members.empty()) throw std::runtime_error("build_dataset: empty dataset");
  return ds;
}

namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";

std::string pseudo_word(Rng& rng, size_t target_len) {
  std::string w;
  while (w.size() < target_len) {
    w += kConsonants[rng.below(14)];
    w += kVowels[rng.below(5)];
  }
  return w;
}

std::string fresh_pseudo_word(Rng& rng, size_t target_len, const std::set<std::string>& used) {
  for (;;) {
    std::string w = pseudo_word(rng, target_len);
    if (!used.count(w)) return w;
    target_len += 2;  // widen the space on collision; still deterministic
  }
}

}  // namespace

Cipher Cipher::identity(const std::vector<std::string>& types) {
  Cipher c;
  for (const auto& t : types) c.mapping[t] = t;
  return c;
}

Cipher Cipher::generate(const std::vector<std::string>& types, uint64_t seed) {
  Cipher c;
  c.seed = seed;
  Rng rng(seed, "cipher/words");
  std::set<std::string> used;
  for (const auto& t : types) {
    const size_t len = std::clamp<size_t>(utf8_codepoints(t).size(), 2, 12);
    std::string w = fresh_pseudo_word(rng, len, used);
    used.insert(w);
    c.mapping[t] = std::move(w);
  }
  return c;
}

Cipher Cipher::derive(const Cipher& ref, const std::vector<std::string>& types, uint64_t seed,
                      double overlap) {
  if (overlap < 0.0 || overlap > 1.0)
    throw std::runtime_error("Cipher::derive: overlap must be in [0, 1]");
  Cipher c;
  c.seed = seed;

  std::vector<std::string> order = types;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  const size_t keep = static_cast<size_t>(std::llround(overlap * order.size()));
  Rng keep_rng(seed, "cipher/keep");
  keep_rng.shuffle(order);

  std::set<std::string> used;
  for (size_t i = 0; i < keep; ++i) {
    auto it = ref.mapping.find(order[i]);
    if (it == ref.mapping.end())
      throw std::runtime_error("Cipher::derive: reference lacks type: " + order[i]);
    c.mapping[order[i]] = it->second;
    used.insert(it->second);
  }
  // remaining types get fresh words, assigned in sorted order
  std::vector<std::string> rest(order.begin() + keep, order.end());
  std::sort(rest.begin(), rest.end());
  Rng rng(seed, "cipher/words");
  for (const auto& t : rest) {
    const size_t len = std::clamp<size_t>(utf8_codepoints(t).size(), 2, 12);
    std::string w = fresh_pseudo_word(rng, len, used);
    used.insert(w);
    c.mapping[t] = std::move(w);
  }
  return c;
}

nlohmann::json Cipher::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["seed"] = seed;
  j["mapping"] = mapping;
  return j;
}

Cipher Cipher::from_json(const nlohmann::json& j) {
  Cipher c;
  c.seed = j.value("seed", static_cast<uint64_t>(0));
  c.mapping = j.at("mapping").get<std::map<std::string, std::string>>();
  return c;
}

void Cipher::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("Cipher::save: cannot write " + path);
  out << to_json().dump(2) << "\n";
}

Cipher Cipher::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Cipher::load: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

std::vector<std::string> source_word_types(const ParallelCorpus& corpus) {
  std::set<std::string> types;
  for (const auto& p : corpus.pairs)
    for (auto& w : split_words(p.src)) types.insert(w);
  return {types.begin(), types.end()};
}

ParallelCorpus apply_cipher(const ParallelCorpus& base, const Cipher& cipher,
                            const std::string& new_lang) {
  ParallelCorpus out;
  out.src_lang = new_lang;
  out.tgt_lang = base.tgt_lang;
  out.split = base.split;
  out.pairs.reserve(base.pairs.size());
  for (const auto& p : base.pairs) {
    std::string src;
    for (const auto& w : split_words(p.src)) {
      if (!src.empty()) src += ' ';
      auto it = cipher.mapping.find(w);
      src += it == cipher.mapping.end() ? w : it->second;
    }
    out.pairs.push_back({std::move(src), p.tgt, new_lang});
  }
  return out;
}

ParallelCorpus synth_related_language(const ParallelCorpus& base, uint64_t seed, double overlap,
                                      const std::string& new_lang, const Cipher* ref,
                                      Cipher* cipher_out) {
  if (base.pairs.empty()) throw std::runtime_error("synth_related_language: empty base corpus");
  if (overlap < 0.0 || overlap > 1.0)
    throw std::runtime_error("synth_related_language: overlap must be in [0, 1]");
  const auto types = source_word_types(base);
  Cipher c = ref ? Cipher::derive(*ref, types, seed, overlap) : Cipher::generate(types, seed);
  if (cipher_out) *cipher_out = c;
  return apply_cipher(base, c, new_lang);
}

void write_corpus(const ParallelCorpus& corpus, const std::string& src_path,
                  const std::string& tgt_path) {
  std::ofstream src(src_path, std::ios::binary), tgt(tgt_path, std::ios::binary);
  if (!src || !tgt)
    throw std::runtime_error("write_corpus: cannot write " + (!src ? src_path : tgt_path));
  for (const auto& p : corpus.pairs) {
    src << p.src << "\n";
    tgt << p.tgt << "\n";
  }
}

}  // namespace ranmt
