#pragma once

// Shared helpers for the test suites: temp dirs, file helpers, and the
// deterministic toy copy-corpus generator used by the sampler/model/trainer
// tests and the acceptance experiments.

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "ranmt/corpus.hpp"
#include "ranmt/rng.hpp"

namespace testutil {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("ranmt_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& rel = "") const { return (path / rel).string(); }
};

inline void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l << "\n";
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Deterministic inventory of pseudo-English word types.
inline std::vector<std::string> base_word_list(int n_types, uint64_t seed = 77) {
  static const char* cons = "bcdfghlmnprstwy";
  static const char* vowel = "aeiou";
  ranmt::Rng rng(seed, "base-words");
  std::vector<std::string> words;
  std::set<std::string> used;
  while (static_cast<int>(words.size()) < n_types) {
    std::string w;
    const int sylls = 1 + static_cast<int>(rng.below(3));
    for (int s = 0; s < sylls; ++s) {
      w += cons[rng.below(15)];
      w += vowel[rng.below(5)];
    }
    if (used.insert(w).second) words.push_back(w);
  }
  return words;
}

// Copy-task corpus: target equals source, word types drawn Zipf-style.
inline ranmt::ParallelCorpus gen_copy_corpus(uint64_t seed, int n_sentences,
                                             const std::vector<std::string>& words,
                                             int min_len = 3, int max_len = 9,
                                             const std::string& lang = "base",
                                             ranmt::Split split = ranmt::Split::Train) {
  ranmt::Rng rng(seed, "gen-copy");
  std::vector<double> cum;
  double total = 0;
  for (size_t r = 0; r < words.size(); ++r) {
    total += 1.0 / static_cast<double>(r + 3);
    cum.push_back(total);
  }
  auto draw_word = [&]() -> const std::string& {
    const double u = rng.next_double() * total;
    const size_t idx = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
    return words[std::min(idx, words.size() - 1)];
  };
  ranmt::ParallelCorpus c;
  c.src_lang = lang;
  c.split = split;
  for (int i = 0; i < n_sentences; ++i) {
    const int len = min_len + static_cast<int>(rng.below(max_len - min_len + 1));
    std::string s;
    for (int w = 0; w < len; ++w) {
      if (w) s += ' ';
      s += draw_word();
    }
    c.pairs.push_back({s, s, lang});
  }
  return c;
}

inline std::vector<std::string> src_lines(const ranmt::ParallelCorpus& c) {
  std::vector<std::string> out;
  for (const auto& p : c.pairs) out.push_back(p.src);
  return out;
}

inline std::vector<std::string> tgt_lines(const ranmt::ParallelCorpus& c) {
  std::vector<std::string> out;
  for (const auto& p : c.pairs) out.push_back(p.tgt);
  return out;
}

}  // namespace testutil
