#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "revmatch/errors.hpp"

namespace revmatch::deptree {

inline constexpr int kRoot = -1;

// One sentence's head-indexed dependency tree (0-based; head == kRoot marks
// the single root). Labels are ignored; only the HEAD column is used.
struct DependencyTree {
  std::vector<std::string> forms;
  std::vector<int> head;

  int size() const { return static_cast<int>(forms.size()); }
  int root() const;

  // Checks acyclicity, exactly one root, and index bounds.
  void validate() const;
};

// Parses one CoNLL-U sentence block (10 tab-separated columns). Multiword
// ranges and empty nodes are skipped; HEAD 0 becomes kRoot.
DependencyTree parse_conllu(std::string_view block);

std::string to_conllu(const DependencyTree& tree);

// Left-headed chain: head[0] = ROOT, head[i] = i-1. Used when no parse is
// available; ancestor windows then degenerate to left n-grams.
DependencyTree fallback_chain(const std::vector<std::string>& forms);

// k-th ancestor of node i; ancestor(t, i, 0) == i; walks past the root
// saturate at the root.
int ancestor(const DependencyTree& tree, int i, int k);

// [i, parent(i), ..., k-1 ancestors], length exactly k, root-saturated.
std::vector<int> ancestor_window(const DependencyTree& tree, int i, int k);

// [i, then up to k-1 other children of head[i] in increasing position
// order], padded with i when siblings run out. The root has no siblings.
std::vector<int> sibling_window(const DependencyTree& tree, int i, int k);

// review_id -> per-sentence trees, keyed by "# review_id = <id> sent = <n>"
// comment lines. Sentences are stored in ascending <n> order.
using ParseMap = std::map<std::string, std::vector<DependencyTree>>;
ParseMap load_conllu_file(const std::string& path);

}  // namespace revmatch::deptree
