#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ranmt/rng.hpp"
#include "ranmt/subword.hpp"

using namespace ranmt;
namespace fs = std::filesystem;

namespace {

std::string marked(const std::string& s) { return std::string(kBoundary) + s; }

bool has_token(const SubwordVocab& v, const std::string& t) {
  return std::find(v.tokens.begin(), v.tokens.end(), t) != v.tokens.end();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// toy sentence generator over a small alphabet
std::vector<std::string> toy_lines(uint64_t seed, int n, int max_words = 8) {
  static const std::vector<std::string> syll{"ba", "ke", "li", "mo", "nu", "pa", "re", "so", "tu", "vi"};
  Rng rng(seed, "subword-toy");
  std::vector<std::string> lines;
  for (int i = 0; i < n; ++i) {
    std::string line;
    const int words = 1 + static_cast<int>(rng.below(max_words));
    for (int w = 0; w < words; ++w) {
      if (w) line += ' ';
      const int sylls = 1 + static_cast<int>(rng.below(3));
      for (int s = 0; s < sylls; ++s) line += syll[rng.below(syll.size())];
    }
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_CASE("train_vocab merges the most frequent pair") {
  auto v = train_vocab({"aa aa aa"}, "toy", 8);
  CHECK(has_token(v, marked("aa")));
  CHECK(v.tokens.size() <= 8);
  REQUIRE(v.merges.size() == 1);
  CHECK(v.merges[0] == std::pair<std::string, std::string>{marked("a"), "a"});
}

TEST_CASE("train_vocab on a single character has nothing to merge") {
  auto v = train_vocab({"a"}, "toy", 8);
  std::vector<std::string> expected = special_tokens();
  expected.push_back(marked("a"));
  expected.push_back("a");
  std::sort(expected.begin() + 4, expected.end());
  CHECK(v.tokens == expected);
  CHECK(v.merges.empty());
}

TEST_CASE("train_vocab respects the size cap") {
  auto lines = toy_lines(1, 300);
  auto v = train_vocab(lines, "toy", 60);
  CHECK(v.tokens.size() <= 60);
  CHECK_THROWS(train_vocab(lines, "toy", 5));  // smaller than alphabet + specials
}

TEST_CASE("train_vocab is deterministic and vocab files round-trip byte-identically") {
  auto lines = toy_lines(2, 200);
  auto v1 = train_vocab(lines, "toy", 80);
  auto v2 = train_vocab(lines, "toy", 80);
  CHECK(v1.tokens == v2.tokens);
  CHECK(v1.merges == v2.merges);

  const fs::path dir = fs::temp_directory_path() / "ranmt_subword_test";
  fs::create_directories(dir);
  save_vocab(v1, (dir / "a.vocab").string());
  save_vocab(v2, (dir / "b.vocab").string());
  CHECK(read_file(dir / "a.vocab") == read_file(dir / "b.vocab"));

  auto loaded = load_vocab((dir / "a.vocab").string());
  CHECK(loaded.tokens == v1.tokens);
  CHECK(loaded.merges == v1.merges);
  CHECK(loaded.lang == "toy");
  save_vocab(loaded, (dir / "c.vocab").string());
  CHECK(read_file(dir / "a.vocab") == read_file(dir / "c.vocab"));
  fs::remove_all(dir);
}

TEST_CASE("adding data for one language never alters another language's vocab") {
  auto lines_a = toy_lines(3, 150);
  auto v_before = train_vocab(lines_a, "aaa", 70);
  // new LRL data appears: retrain only the other language
  auto v_lrl = train_vocab(toy_lines(4, 50), "bbb", 70);
  auto v_after = train_vocab(lines_a, "aaa", 70);
  CHECK(v_before.tokens == v_after.tokens);
  CHECK(v_before.merges == v_after.merges);
}

TEST_CASE("union of disjoint vocabs counts specials once") {
  auto va = train_vocab({"aa aa aa"}, "la", 8);    // specials + a, _a, _aa
  auto vb = train_vocab({"bb bb"}, "lb", 8);      // specials + b, _b, _bb
  auto u = UnionVocab::build({va, vb});
  CHECK(u.size() == static_cast<int32_t>(va.tokens.size() + vb.tokens.size() - 4));
  CHECK(u.has_lang("la"));
  CHECK(u.has_lang("lb"));
}

TEST_CASE("union with itself is idempotent; shared tokens get one index") {
  auto va = train_vocab({"aa aa aa"}, "la", 8);
  auto u1 = UnionVocab::build({va});
  auto u2 = UnionVocab::build({va, va});
  CHECK(u1.tokens() == u2.tokens());

  auto vb = train_vocab({"aa"}, "lb", 8);  // shares token _aa? no merges (single word once) -- shares a, _a
  auto u = UnionVocab::build({va, vb});
  int count_a = 0;
  for (const auto& t : u.tokens())
    if (t == "a") ++count_a;
  CHECK(count_a == 1);
}

TEST_CASE("extend_union appends without renumbering") {
  auto va = train_vocab(toy_lines(5, 120), "la", 90);
  auto u = UnionVocab::build({va});
  const auto before = u.tokens();

  auto vb = train_vocab(toy_lines(6, 120), "lb", 90);
  auto u2 = u.extended(vb);
  REQUIRE(u2.size() >= u.size());
  for (int32_t i = 0; i < u.size(); ++i) CHECK(u2.tokens()[i] == before[i]);
  CHECK(u2.has_lang("lb"));
  CHECK_THROWS(u2.extended(vb));  // duplicate language

  // encoding for the old language is unchanged by the extension
  const std::string sent = "bake limo";
  CHECK(u.encode(sent, "la") == u2.encode(sent, "la"));

  // extension whose tokens all exist adds only the segmenter
  auto u3 = u.extended(SubwordVocab{"lc", 8, va.tokens, va.merges});
  CHECK(u3.tokens() == u.tokens());
  CHECK(u3.has_lang("lc"));
}

TEST_CASE("extend_union property: random extensions never move an existing token") {
  Rng rng(9, "extend-prop");
  auto u = UnionVocab::build({train_vocab(toy_lines(10, 100), "l0", 80)});
  for (int round = 1; round <= 8; ++round) {
    auto v = train_vocab(toy_lines(100 + round, 40 + static_cast<int>(rng.below(100))),
                         "l" + std::to_string(round), 60 + static_cast<int>(rng.below(40)));
    auto u2 = u.extended(v);
    for (int32_t i = 0; i < u.size(); ++i) {
      CHECK(u2.tokens()[i] == u.tokens()[i]);
      CHECK(u2.id_of(u.tokens()[i]) == i);
    }
    u = u2;
  }
}

TEST_CASE("encode applies recorded merges; unseen characters become UNK") {
  auto v = train_vocab({"aa aa aa"}, "toy", 8);
  auto u = UnionVocab::build({v});

  // "aaaa" -> [_a a a a] -> only the learned (_a, a) merge applies once
  auto ids = u.encode("aaaa", "toy");
  std::vector<int32_t> expected{kBosId, u.id_of(marked("aa")), u.id_of("a"), u.id_of("a"), kEosId};
  CHECK(ids == expected);

  CHECK(u.encode("", "toy") == std::vector<int32_t>{kBosId, kEosId});

  auto unk = u.encode("zzz", "toy");
  REQUIRE(unk.size() == 5);
  CHECK(unk.front() == kBosId);
  CHECK(unk.back() == kEosId);
  for (size_t i = 1; i + 1 < unk.size(); ++i) CHECK(unk[i] == kUnkId);

  CHECK_THROWS(u.encode("aa", "nosuchlang"));
}

TEST_CASE("characters of other languages stay UNK under this language's segmenter") {
  auto va = train_vocab({"aa aa"}, "la", 10);
  auto vb = train_vocab({"bb bb"}, "lb", 10);
  auto u = UnionVocab::build({va, vb});
  // "b" exists in the union via lb, but la never saw it
  auto ids = u.encode("b", "la");
  CHECK(ids == std::vector<int32_t>{kBosId, kUnkId, kEosId});
}

TEST_CASE("decode inverts encode and strips specials") {
  auto v = train_vocab(toy_lines(7, 200), "toy", 100);
  auto u = UnionVocab::build({v});
  CHECK(u.decode({kBosId, kEosId}).empty());

  const std::string s = "bake limo nuso";
  CHECK(u.decode(u.encode(s, "toy")) == s);

  auto with_unk = u.decode({kBosId, kUnkId, kEosId});
  CHECK(with_unk == "<unk>");

  CHECK_THROWS(u.decode({kBosId, 999999, kEosId}));
}

TEST_CASE("roundtrip property: held-out sentences with seen characters survive") {
  auto train = toy_lines(11, 400);
  auto v = train_vocab(train, "toy", 120);
  auto u = UnionVocab::build({v});
  auto held_out = toy_lines(999, 500);  // same alphabet, unseen sentences
  for (const auto& s : held_out) CHECK(u.decode(u.encode(s, "toy")) == s);
}

TEST_CASE("union vocab JSON round-trip preserves encoding behavior") {
  auto va = train_vocab(toy_lines(12, 150), "la", 90);
  auto vb = train_vocab(toy_lines(13, 150), "lb", 90);
  auto u = UnionVocab::build({va, vb});
  auto j = u.to_json();
  auto u2 = UnionVocab::from_json(j);
  CHECK(u2.tokens() == u.tokens());
  CHECK(u2.languages() == u.languages());
  const std::string s = "bake limo";
  CHECK(u2.encode(s, "la") == u.encode(s, "la"));
  CHECK(u2.encode(s, "lb") == u.encode(s, "lb"));
  CHECK(u2.to_json() == j);
}
