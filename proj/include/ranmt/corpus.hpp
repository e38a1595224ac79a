#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ranmt {

enum class Split { Train, Dev, Test };
const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct SentencePair {
  std::string src, tgt;
  std::string src_lang;
};

struct ParallelCorpus {
  std::string src_lang;
  std::string tgt_lang = "eng";
  Split split = Split::Train;
  std::vector<SentencePair> pairs;
  int64_t dropped_overlong = 0;  // pairs over the length cap
  int64_t dropped_empty = 0;     // pairs with a blank side
};

// One sentence per line, UTF-8, parallel files. Pairs whose either side
// exceeds `max_len` whitespace tokens (or is blank) are dropped and counted.
ParallelCorpus load_corpus(const std::string& src_path, const std::string& tgt_path,
                           const std::string& src_lang, Split split, int max_len = 80);

enum class Role { LRL, HRL, Other };

struct ManifestEntry {
  std::string code;
  Role role = Role::Other;
  std::string helper;  // set iff role == LRL
  // split -> (src path, tgt path), resolved against the manifest directory
  std::map<Split, std::pair<std::string, std::string>> paths;

  bool has_split(Split s) const { return paths.count(s) > 0; }
};

// JSON manifest describing the corpus collection:
// {
//   "version": 1,
//   "target": "eng",
//   "languages": [
//     {"code": "aze", "role": "lrl", "helper": "tur",
//      "train": {"src": "aze.train.src", "tgt": "aze.train.eng"},
//      "dev":   {"src": ..., "tgt": ...},
//      "test":  {"src": ..., "tgt": ...}},
//     {"code": "tur", "role": "hrl", "train": {...}, ...}
//   ]
// }
// Paths are relative to the manifest file's directory. Every lrl entry must
// name a helper that is itself an entry.
struct Manifest {
  std::string target_lang = "eng";
  std::vector<ManifestEntry> entries;

  static Manifest load(const std::string& path);
  static Manifest from_json(const nlohmann::json& j, const std::string& base_dir);

  const ManifestEntry& entry(const std::string& code) const;
  bool has(const std::string& code) const;
  const std::string& helper_of(const std::string& lrl) const;
};

enum class Strategy { Sing, Bi, All };
const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct DatasetMember {
  ParallelCorpus corpus;
  bool is_lrl = false;
  bool is_hrl = false;  // the designated helper of the run's LRL
};

struct TrainingDataset {
  std::vector<DatasetMember> members;
  std::string provenance;  // Sing, Bi, All, Bi-, All-
  std::string lrl;
  size_t total_sentences() const;
  std::vector<std::string> languages() const;
};

// Sing: the LRL alone; Bi: LRL plus its helper; All: every language with
// train data. cold_start removes the LRL entirely (Bi-, All-).
TrainingDataset build_dataset(const Manifest& manifest, Strategy strategy,
                              const std::string& lrl, bool cold_start);

// Deterministic word-type substitution cipher. Each source word type maps to
// a generated pseudo-word, injectively. A derived cipher keeps exactly
// round(overlap * |types|) of the reference's mappings and re-randomizes the
// rest, which makes lexical overlap between synthetic languages a controlled
// variable.
struct Cipher {
  uint64_t seed = 0;
  std::map<std::string, std::string> mapping;

  static Cipher identity(const std::vector<std::string>& types);
  static Cipher generate(const std::vector<std::string>& types, uint64_t seed);
  static Cipher derive(const Cipher& ref, const std::vector<std::string>& types, uint64_t seed,
                       double overlap);

  nlohmann::json to_json() const;
  static Cipher from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Cipher load(const std::string& path);
};

// Sorted unique whitespace-delimited source-side word types.
std::vector<std::string> source_word_types(const ParallelCorpus& corpus);

ParallelCorpus apply_cipher(const ParallelCorpus& base, const Cipher& cipher,
                            const std::string& new_lang);

// Fresh cipher when `ref` is null, otherwise derived from `ref` at `overlap`.
ParallelCorpus synth_related_language(const ParallelCorpus& base, uint64_t seed, double overlap,
                                      const std::string& new_lang, const Cipher* ref = nullptr,
                                      Cipher* cipher_out = nullptr);

void write_corpus(const ParallelCorpus& corpus, const std::string& src_path,
                  const std::string& tgt_path);

}  // namespace ranmt
