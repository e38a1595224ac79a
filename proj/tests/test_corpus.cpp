#include <doctest.h>

#include <set>

#include "ranmt/corpus.hpp"
#include "testutil.hpp"

using namespace ranmt;
using testutil::TempDir;
using testutil::write_lines;

TEST_CASE("load_corpus pairs lines and validates alignment") {
  TempDir dir("corpus");
  write_lines(dir.str("a.src"), {"hello world", "second line"});
  write_lines(dir.str("a.tgt"), {"HELLO", "SECOND"});
  auto c = load_corpus(dir.str("a.src"), dir.str("a.tgt"), "aaa", Split::Train);
  REQUIRE(c.pairs.size() == 2);
  CHECK(c.pairs[0].src == "hello world");
  CHECK(c.pairs[0].tgt == "HELLO");
  CHECK(c.pairs[1].src_lang == "aaa");

  write_lines(dir.str("b.src"), {"1", "2", "3"});
  CHECK_THROWS(load_corpus(dir.str("b.src"), dir.str("a.tgt"), "aaa", Split::Train));

  write_lines(dir.str("empty.src"), {});
  CHECK_THROWS(load_corpus(dir.str("empty.src"), dir.str("a.tgt"), "aaa", Split::Train));
  CHECK_THROWS(load_corpus(dir.str("missing.src"), dir.str("a.tgt"), "aaa", Split::Train));
}

TEST_CASE("load_corpus drops overlong and blank pairs, counting them") {
  TempDir dir("corpus_cap");
  std::string long_line = "w";
  for (int i = 0; i < 85; ++i) long_line += " w";
  write_lines(dir.str("a.src"), {"ok line", long_line, "   ", "fine"});
  write_lines(dir.str("a.tgt"), {"t1", "t2", "t3", "t4"});
  auto c = load_corpus(dir.str("a.src"), dir.str("a.tgt"), "aaa", Split::Train);
  CHECK(c.pairs.size() == 2);
  CHECK(c.dropped_overlong == 1);
  CHECK(c.dropped_empty == 1);

  // the cap is per side: 80 tokens exactly is kept
  std::string cap_line = "w";
  for (int i = 0; i < 79; ++i) cap_line += " w";
  write_lines(dir.str("b.src"), {cap_line});
  write_lines(dir.str("b.tgt"), {"t"});
  CHECK(load_corpus(dir.str("b.src"), dir.str("b.tgt"), "aaa", Split::Train).pairs.size() == 1);
}

TEST_CASE("a 5940-line corpus loads 5940 pairs") {
  TempDir dir("corpus_aze");
  std::vector<std::string> src, tgt;
  for (int i = 0; i < 5940; ++i) {
    src.push_back("src sentence " + std::to_string(i));
    tgt.push_back("tgt sentence " + std::to_string(i));
  }
  write_lines(dir.str("aze.train.src"), src);
  write_lines(dir.str("aze.train.eng"), tgt);
  auto c = load_corpus(dir.str("aze.train.src"), dir.str("aze.train.eng"), "aze", Split::Train);
  CHECK(c.pairs.size() == 5940);
}

namespace {

// writes a manifest with aze (lrl, helper tur), tur, and xxx, all sharing
// tiny generated corpora
testutil::TempDir make_manifest_dir() {
  testutil::TempDir dir("manifest");
  auto mk = [&](const std::string& lang, int n) {
    std::vector<std::string> src, tgt;
    for (int i = 0; i < n; ++i) {
      src.push_back(lang + " src " + std::to_string(i));
      tgt.push_back("tgt " + std::to_string(i));
    }
    write_lines(dir.str(lang + ".train.src"), src);
    write_lines(dir.str(lang + ".train.eng"), tgt);
    write_lines(dir.str(lang + ".dev.src"), {lang + " dev"});
    write_lines(dir.str(lang + ".dev.eng"), {"dev tgt"});
  };
  mk("aze", 10);
  mk("tur", 30);
  mk("xxx", 20);
  write_lines(dir.str("manifest.json"), {R"({
    "version": 1,
    "target": "eng",
    "languages": [
      {"code": "aze", "role": "lrl", "helper": "tur",
       "train": {"src": "aze.train.src", "tgt": "aze.train.eng"},
       "dev": {"src": "aze.dev.src", "tgt": "aze.dev.eng"}},
      {"code": "tur", "role": "hrl",
       "train": {"src": "tur.train.src", "tgt": "tur.train.eng"},
       "dev": {"src": "tur.dev.src", "tgt": "tur.dev.eng"}},
      {"code": "xxx", "role": "other",
       "train": {"src": "xxx.train.src", "tgt": "xxx.train.eng"},
       "dev": {"src": "xxx.dev.src", "tgt": "xxx.dev.eng"}}
    ]
  })"});
  return dir;
}

size_t count_lang(const TrainingDataset& ds, const std::string& lang) {
  size_t n = 0;
  for (const auto& m : ds.members)
    for (const auto& p : m.corpus.pairs)
      if (p.src_lang == lang) ++n;
  return n;
}

}  // namespace

TEST_CASE("manifest loads, resolves paths and validates helpers") {
  auto dir = make_manifest_dir();
  auto m = Manifest::load(dir.str("manifest.json"));
  CHECK(m.target_lang == "eng");
  CHECK(m.entries.size() == 3);
  CHECK(m.helper_of("aze") == "tur");
  CHECK(m.entry("tur").role == Role::HRL);
  CHECK_THROWS(m.entry("nope"));
  CHECK_THROWS(m.helper_of("tur"));

  write_lines(dir.str("bad.json"), {R"({"languages":[
    {"code":"aze","role":"lrl","helper":"missing",
     "train":{"src":"aze.train.src","tgt":"aze.train.eng"}}]})"});
  CHECK_THROWS(Manifest::load(dir.str("bad.json")));

  write_lines(dir.str("dup.json"), {R"({"languages":[
    {"code":"aze","role":"other"},{"code":"aze","role":"other"}]})"});
  CHECK_THROWS(Manifest::load(dir.str("dup.json")));

  write_lines(dir.str("badcode.json"), {R"({"languages":[{"code":"AZE","role":"other"}]})"});
  CHECK_THROWS(Manifest::load(dir.str("badcode.json")));
}

TEST_CASE("build_dataset selects members per strategy") {
  auto dir = make_manifest_dir();
  auto m = Manifest::load(dir.str("manifest.json"));

  auto bi = build_dataset(m, Strategy::Bi, "aze", false);
  CHECK(bi.provenance == "Bi");
  CHECK(bi.languages() == std::vector<std::string>{"aze", "tur"});
  CHECK(bi.members[0].is_lrl);
  CHECK(bi.members[1].is_hrl);

  auto sing = build_dataset(m, Strategy::Sing, "aze", false);
  CHECK(sing.languages() == std::vector<std::string>{"aze"});
  CHECK(sing.total_sentences() == 10);

  auto all = build_dataset(m, Strategy::All, "aze", false);
  CHECK(all.total_sentences() == 60);  // sum of member corpora
  CHECK(count_lang(all, "aze") == 10);

  auto all_minus = build_dataset(m, Strategy::All, "aze", true);
  CHECK(all_minus.provenance == "All-");
  CHECK(count_lang(all_minus, "aze") == 0);
  CHECK(all_minus.total_sentences() == 50);

  auto bi_minus = build_dataset(m, Strategy::Bi, "aze", true);
  CHECK(bi_minus.provenance == "Bi-");
  CHECK(bi_minus.languages() == std::vector<std::string>{"tur"});

  CHECK_THROWS(build_dataset(m, Strategy::Sing, "aze", true));
  CHECK_THROWS(build_dataset(m, Strategy::Sing, "nope", false));
}

TEST_CASE("synth cipher: identity, determinism, full and partial overlap") {
  auto words = testutil::base_word_list(100);
  auto base = testutil::gen_copy_corpus(5, 200, words);

  auto types = source_word_types(base);
  auto ident = apply_cipher(base, Cipher::identity(types), "idn");
  for (size_t i = 0; i < base.pairs.size(); ++i) CHECK(ident.pairs[i].src == base.pairs[i].src);

  Cipher ca;
  auto hrl1 = synth_related_language(base, 11, 1.0, "alp", nullptr, &ca);
  auto hrl2 = synth_related_language(base, 11, 1.0, "alp");
  for (size_t i = 0; i < hrl1.pairs.size(); ++i) CHECK(hrl1.pairs[i].src == hrl2.pairs[i].src);

  // full overlap relative to cipher A reproduces A's output exactly
  auto lrl_full = synth_related_language(base, 22, 1.0, "bet", &ca);
  for (size_t i = 0; i < hrl1.pairs.size(); ++i) CHECK(lrl_full.pairs[i].src == hrl1.pairs[i].src);

  // cipher output is a different surface language
  CHECK(hrl1.pairs[0].src != base.pairs[0].src);
  CHECK(hrl1.pairs[0].tgt == base.pairs[0].tgt);
}

TEST_CASE("derived cipher keeps exactly round(overlap * types) mappings") {
  auto words = testutil::base_word_list(100);
  auto base = testutil::gen_copy_corpus(6, 400, words);
  auto types = source_word_types(base);
  REQUIRE(types.size() >= 90);

  auto ref = Cipher::generate(types, 7);
  auto derived = Cipher::derive(ref, types, 8, 0.8);
  size_t same = 0;
  for (const auto& t : types)
    if (derived.mapping.at(t) == ref.mapping.at(t)) ++same;
  CHECK(same == static_cast<size_t>(std::llround(0.8 * types.size())));

  // derived cipher stays injective
  std::set<std::string> outputs;
  for (const auto& [k, v] : derived.mapping) outputs.insert(v);
  CHECK(outputs.size() == derived.mapping.size());

  CHECK_THROWS(Cipher::derive(ref, types, 8, 1.5));
  CHECK_THROWS(synth_related_language(base, 1, -0.1, "bad"));
}

TEST_CASE("cipher JSON round-trip") {
  auto words = testutil::base_word_list(40);
  auto base = testutil::gen_copy_corpus(9, 60, words);
  auto types = source_word_types(base);
  auto c = Cipher::generate(types, 3);
  TempDir dir("cipher");
  c.save(dir.str("c.json"));
  auto loaded = Cipher::load(dir.str("c.json"));
  CHECK(loaded.mapping == c.mapping);
  CHECK(loaded.seed == c.seed);
}

TEST_CASE("write_corpus then load_corpus round-trips") {
  auto words = testutil::base_word_list(50);
  auto base = testutil::gen_copy_corpus(10, 120, words);
  TempDir dir("roundtrip");
  write_corpus(base, dir.str("x.src"), dir.str("x.tgt"));
  auto loaded = load_corpus(dir.str("x.src"), dir.str("x.tgt"), "base", Split::Train);
  REQUIRE(loaded.pairs.size() == base.pairs.size());
  for (size_t i = 0; i < base.pairs.size(); ++i) {
    CHECK(loaded.pairs[i].src == base.pairs[i].src);
    CHECK(loaded.pairs[i].tgt == base.pairs[i].tgt);
  }
}
