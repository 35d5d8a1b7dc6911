#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "revmatch/deptree.hpp"
#include "revmatch/rng.hpp"

using namespace revmatch;
using deptree::DependencyTree;
using deptree::kRoot;

namespace {

std::string conllu_block(const std::vector<std::pair<std::string, int>>& rows) {
  std::string out;
  int id = 0;
  for (const auto& [form, head] : rows) {
    ++id;
    out += std::to_string(id) + "\t" + form + "\t_\t_\t_\t_\t" +
           std::to_string(head) + "\t_\t_\t_\n";
  }
  return out;
}

DependencyTree random_tree(Rng& rng, int n) {
  // node 0 is the root; every other node hangs off an earlier node
  DependencyTree t;
  for (int i = 0; i < n; ++i) {
    t.forms.push_back("w" + std::to_string(i));
    t.head.push_back(i == 0 ? kRoot
                            : static_cast<int>(rng.next_below(
                                  static_cast<std::uint64_t>(i))));
  }
  t.validate();
  return t;
}

std::string write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("conllu parsing maps 1-based heads to 0-based indices") {
  auto tree = deptree::parse_conllu(
      conllu_block({{"the", 2}, {"app", 0}, {"crashes", 2}}));
  CHECK(tree.head == std::vector<int>{1, kRoot, 1});
  CHECK(tree.forms == std::vector<std::string>{"the", "app", "crashes"});
  CHECK(tree.root() == 1);
}

TEST_CASE("conllu parsing rejects cycles and multiple roots") {
  CHECK_THROWS_WITH_AS(
      deptree::parse_conllu(conllu_block({{"a", 0}, {"b", 3}, {"c", 2}})),
      doctest::Contains("Cycle"), DataError);
  CHECK_THROWS_WITH_AS(
      deptree::parse_conllu(conllu_block({{"a", 2}, {"b", 1}})),
      doctest::Contains("NoRoot"), DataError);
  CHECK_THROWS_WITH_AS(
      deptree::parse_conllu(conllu_block({{"a", 0}, {"b", 0}})),
      doctest::Contains("MultipleRoots"), DataError);
  CHECK_THROWS_WITH_AS(deptree::parse_conllu("1\tonly_two_cols\n"),
                       doctest::Contains("MalformedLine"), DataError);
}

TEST_CASE("conllu parsing skips multiword ranges and empty nodes") {
  std::string block =
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\t_\t_\t_\t_\t0\t_\t_\t_\n"
      "2\tnot\t_\t_\t_\t_\t1\t_\t_\t_\n"
      "2.1\televen\t_\t_\t_\t_\t1\t_\t_\t_\n";
  auto tree = deptree::parse_conllu(block);
  CHECK(tree.forms == std::vector<std::string>{"do", "not"});
  CHECK(tree.head == std::vector<int>{kRoot, 0});
}

TEST_CASE("serialization round-trips head arrays exactly") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    auto tree = random_tree(rng, 2 + static_cast<int>(rng.next_below(10)));
    auto round = deptree::parse_conllu(deptree::to_conllu(tree));
    CHECK(round.head == tree.head);
    CHECK(round.forms == tree.forms);
  }
}

TEST_CASE("fallback chain is a left-headed chain") {
  auto four = deptree::fallback_chain({"a", "b", "c", "d"});
  CHECK(four.head == std::vector<int>{kRoot, 0, 1, 2});
  auto one = deptree::fallback_chain({"solo"});
  CHECK(one.head == std::vector<int>{kRoot});
  CHECK(deptree::ancestor(four, 3, 2) == 1);
  CHECK_THROWS_WITH_AS(deptree::fallback_chain({}),
                       doctest::Contains("EmptySentence"), DataError);
}

TEST_CASE("ancestor walks and saturates at the root") {
  auto chain = deptree::fallback_chain({"a", "b", "c", "d"});
  for (int i = 0; i < 4; ++i) CHECK(deptree::ancestor(chain, i, 0) == i);
  CHECK(deptree::ancestor(chain, 3, 3) == 0);
  CHECK(deptree::ancestor(chain, 1, 5) == 0);
  CHECK_THROWS_WITH_AS(deptree::ancestor(chain, 9, 1),
                       doctest::Contains("IndexOutOfRange"), DataError);
}

TEST_CASE("ancestor satisfies its defining recursion on random trees") {
  Rng rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    auto tree = random_tree(rng, 2 + static_cast<int>(rng.next_below(8)));
    for (int i = 0; i < tree.size(); ++i)
      for (int k = 0; k < 6; ++k)
        CHECK(deptree::ancestor(tree, i, k + 1) ==
              deptree::ancestor(tree, deptree::ancestor(tree, i, 1), k));
  }
}

TEST_CASE("ancestor windows have exact length and valid indices") {
  auto chain = deptree::fallback_chain({"a", "b", "c", "d"});
  CHECK(deptree::ancestor_window(chain, 3, 3) == std::vector<int>{3, 2, 1});
  CHECK(deptree::ancestor_window(chain, 0, 3) == std::vector<int>{0, 0, 0});

  DependencyTree star;
  star.forms = {"r", "x", "y", "z"};
  star.head = {kRoot, 0, 0, 0};
  CHECK(deptree::ancestor_window(star, 2, 2) == std::vector<int>{2, 0});

  Rng rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    auto tree = random_tree(rng, 1 + static_cast<int>(rng.next_below(9)));
    for (int i = 0; i < tree.size(); ++i)
      for (int k = 1; k <= 5; ++k) {
        auto w = deptree::ancestor_window(tree, i, k);
        CHECK(w.size() == static_cast<std::size_t>(k));
        for (int idx : w) {
          CHECK(idx >= 0);
          CHECK(idx < tree.size());
        }
      }
  }
}

TEST_CASE("sibling windows: star tree, padding, chains") {
  DependencyTree star;
  star.forms = {"r", "x", "y", "z"};
  star.head = {kRoot, 0, 0, 0};
  CHECK(deptree::sibling_window(star, 1, 3) == std::vector<int>{1, 2, 3});
  CHECK(deptree::sibling_window(star, 1, 5) ==
        std::vector<int>{1, 2, 3, 1, 1});

  auto chain = deptree::fallback_chain({"a", "b", "c", "d"});
  for (int i = 0; i < 4; ++i)
    CHECK(deptree::sibling_window(chain, i, 3) == std::vector<int>{i, i, i});

  // root never has siblings
  CHECK(deptree::sibling_window(star, 0, 3) == std::vector<int>{0, 0, 0});
}

TEST_CASE("fallback-chain ancestor windows equal reversed left n-grams") {
  std::vector<std::string> forms = {"a", "b", "c", "d", "e", "f"};
  auto chain = deptree::fallback_chain(forms);
  const int k = 3;
  for (int i = 0; i < chain.size(); ++i) {
    auto window = deptree::ancestor_window(chain, i, k);
    std::vector<int> ngram;  // left n-gram ending at i, clamped at 0
    for (int off = 0; off < k; ++off) ngram.push_back(std::max(i - off, 0));
    CHECK(window == ngram);
  }
}

TEST_CASE("validate catches malformed head arrays") {
  DependencyTree no_root;
  no_root.forms = {"a", "b"};
  no_root.head = {0, 0};
  CHECK_THROWS_AS(no_root.validate(), DataError);

  DependencyTree bad_index;
  bad_index.forms = {"a", "b"};
  bad_index.head = {kRoot, 7};
  CHECK_THROWS_AS(bad_index.validate(), DataError);
}

TEST_CASE("conllu files load keyed by review id and sentence number") {
  std::string content =
      "# review_id = r9 sent = 2\n" +
      conllu_block({{"love", 0}, {"it", 1}}) + "\n" +
      "# review_id = r9 sent = 1\n" +
      conllu_block({{"great", 2}, {"app", 0}}) + "\n" +
      "# review_id = r2 sent = 1\n" +
      conllu_block({{"bad", 0}}) + "\n";
  std::string path = write_temp("parses.conllu", content);
  auto parses = deptree::load_conllu_file(path);
  REQUIRE(parses.size() == 2);
  REQUIRE(parses.at("r9").size() == 2);
  // sentence order follows the sent = n key, not file order
  CHECK(parses.at("r9")[0].forms == std::vector<std::string>{"great", "app"});
  CHECK(parses.at("r9")[1].forms == std::vector<std::string>{"love", "it"});
  CHECK(parses.at("r2")[0].forms == std::vector<std::string>{"bad"});
}
