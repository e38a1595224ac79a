#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace ranmt {

// Special token ids, identical in every vocabulary by construction.
inline constexpr int32_t kPadId = 0;
inline constexpr int32_t kBosId = 1;
inline constexpr int32_t kEosId = 2;
inline constexpr int32_t kUnkId = 3;
const std::vector<std::string>& special_tokens();

// Word-boundary marker prefixed to word-initial subwords (U+2581).
inline constexpr const char* kBoundary = "\xe2\x96\x81";

// Splits a UTF-8 string into codepoint substrings; bytes that do not form a
// valid sequence are passed through one byte at a time.
std::vector<std::string> utf8_codepoints(const std::string& s);
std::vector<std::string> split_words(const std::string& line);

// Per-language subword inventory produced by greedy pair merging.
struct SubwordVocab {
  std::string lang;
  int configured_size = 0;
  std::vector<std::string> tokens;  // specials, then alphabet, then merge products
  std::vector<std::pair<std::string, std::string>> merges;
};

// Greedy highest-frequency pair merging over word types; frequency ties break
// on the lexicographically smaller merged string. Covers every character seen
// (both bare and word-initial forms), so UNK is reserved for unseen
// characters. Deterministic: identical input gives byte-identical output.
SubwordVocab train_vocab(const std::vector<std::string>& lines, const std::string& lang,
                         int size = 8000);

void save_vocab(const SubwordVocab& v, const std::string& path);
SubwordVocab load_vocab(const std::string& path);

// Applies one language's merge rules to one word.
class Segmenter {
 public:
  Segmenter() = default;
  explicit Segmenter(const SubwordVocab& v);
  Segmenter(std::set<std::string> alphabet,
            std::vector<std::pair<std::string, std::string>> merges);

  std::vector<std::string> segment_word(const std::string& word) const;
  const std::set<std::string>& alphabet() const { return alphabet_; }
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }

 private:
  std::set<std::string> alphabet_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::map<std::pair<std::string, std::string>, int> ranks_;
};

// Deduplicated union of per-language vocabularies. Token indices are
// append-only: extending with a new language never renumbers existing
// tokens, which is what makes cold-start vocabulary extension safe.
class UnionVocab {
 public:
  UnionVocab() = default;

  static UnionVocab build(const std::vector<SubwordVocab>& vocabs);
  // Returns a copy with `v`'s language added; new tokens appended at the end.
  UnionVocab extended(const SubwordVocab& v) const;

  std::vector<int32_t> encode(const std::string& text, const std::string& lang) const;
  std::string decode(const std::vector<int32_t>& ids) const;

  int32_t size() const { return static_cast<int32_t>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  int32_t id_of(const std::string& token) const;
  bool has_lang(const std::string& lang) const;
  std::vector<std::string> languages() const;

  nlohmann::json to_json() const;
  static UnionVocab from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> index_;
  std::vector<std::pair<std::string, Segmenter>> segmenters_;

  void append_tokens(const std::vector<std::string>& toks);
  const Segmenter* find(const std::string& lang) const;
};

}  // namespace ranmt
