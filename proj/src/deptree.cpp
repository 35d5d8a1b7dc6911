#include "revmatch/deptree.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace revmatch::deptree {

int DependencyTree::root() const {
  for (int i = 0; i < size(); ++i)
    if (head[static_cast<std::size_t>(i)] == kRoot) return i;
  throw DataError("NoRoot");
}

void DependencyTree::validate() const {
  if (forms.size() != head.size())
    throw DataError("MalformedLine: forms/head size mismatch");
  int roots = 0;
  for (int h : head) {
    if (h == kRoot) {
      ++roots;
    } else if (h < 0 || h >= size()) {
      throw DataError("MalformedLine: head index out of range");
    }
  }
  if (roots == 0) throw DataError("NoRoot");
  if (roots > 1) throw DataError("MultipleRoots");
  // Every node must reach the root without revisiting itself.
  for (int i = 0; i < size(); ++i) {
    int steps = 0;
    int node = i;
    while (node != kRoot) {
      node = head[static_cast<std::size_t>(node)];
      if (++steps > size()) throw DataError("Cycle: node " + std::to_string(i));
    }
  }
}

DependencyTree parse_conllu(std::string_view block) {
  DependencyTree tree;
  std::vector<std::pair<long, long>> rows;  // (id, head) 1-based
  std::istringstream in{std::string(block)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        cols.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cols.size() != 10) throw DataError("MalformedLine: " + line);
    // Skip multiword token ranges (1-2) and empty nodes (1.1).
    if (cols[0].find('-') != std::string::npos ||
        cols[0].find('.') != std::string::npos)
      continue;
    long id, head;
    try {
      id = std::stol(cols[0]);
      head = std::stol(cols[6]);
    } catch (const std::exception&) {
      throw DataError("MalformedLine: " + line);
    }
    if (id != static_cast<long>(rows.size()) + 1)
      throw DataError("MalformedLine: non-sequential token id " + cols[0]);
    rows.emplace_back(id, head);
    tree.forms.push_back(cols[1]);
  }
  if (rows.empty()) throw DataError("MalformedLine: empty sentence block");
  for (auto [id, head] : rows) {
    if (head < 0 || head > static_cast<long>(rows.size()))
      throw DataError("MalformedLine: head " + std::to_string(head));
    tree.head.push_back(head == 0 ? kRoot : static_cast<int>(head - 1));
  }
  tree.validate();
  return tree;
}

std::string to_conllu(const DependencyTree& tree) {
  std::ostringstream out;
  for (int i = 0; i < tree.size(); ++i) {
    int h = tree.head[static_cast<std::size_t>(i)];
    out << (i + 1) << '\t' << tree.forms[static_cast<std::size_t>(i)]
        << "\t_\t_\t_\t_\t" << (h == kRoot ? 0 : h + 1) << "\t_\t_\t_\n";
  }
  return out.str();
}

DependencyTree fallback_chain(const std::vector<std::string>& forms) {
  if (forms.empty()) throw DataError("EmptySentence");
  DependencyTree tree;
  tree.forms = forms;
  tree.head.resize(forms.size());
  tree.head[0] = kRoot;
  for (std::size_t i = 1; i < forms.size(); ++i)
    tree.head[i] = static_cast<int>(i - 1);
  return tree;
}

int ancestor(const DependencyTree& tree, int i, int k) {
  if (i < 0 || i >= tree.size())
    throw DataError("IndexOutOfRange: " + std::to_string(i));
  int node = i;
  for (int step = 0; step < k; ++step) {
    int h = tree.head[static_cast<std::size_t>(node)];
    if (h == kRoot) break;  // saturate at the root
    node = h;
  }
  return node;
}

std::vector<int> ancestor_window(const DependencyTree& tree, int i, int k) {
  if (k < 1) throw DataError("IndexOutOfRange: window size must be >= 1");
  std::vector<int> window;
  window.reserve(static_cast<std::size_t>(k));
  int node = i;
  if (i < 0 || i >= tree.size())
    throw DataError("IndexOutOfRange: " + std::to_string(i));
  for (int step = 0; step < k; ++step) {
    window.push_back(node);
    int h = tree.head[static_cast<std::size_t>(node)];
    if (h != kRoot) node = h;
  }
  return window;
}

std::vector<int> sibling_window(const DependencyTree& tree, int i, int k) {
  if (k < 1) throw DataError("IndexOutOfRange: window size must be >= 1");
  if (i < 0 || i >= tree.size())
    throw DataError("IndexOutOfRange: " + std::to_string(i));
  std::vector<int> window{i};
  int parent = tree.head[static_cast<std::size_t>(i)];
  if (parent != kRoot) {
    for (int j = 0; j < tree.size() && static_cast<int>(window.size()) < k; ++j) {
      if (j != i && tree.head[static_cast<std::size_t>(j)] == parent)
        window.push_back(j);
    }
  }
  while (static_cast<int>(window.size()) < k) window.push_back(i);
  return window;
}

ParseMap load_conllu_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("FileNotFound: " + path);
  ParseMap map;
  std::string line;
  std::string review_id;
  long sent_no = -1;
  std::string block;
  std::map<std::string, std::map<long, DependencyTree>> staged;

  auto flush = [&] {
    if (block.empty()) return;
    if (review_id.empty())
      throw DataError("MalformedLine: sentence block without review_id key");
    staged[review_id][sent_no] = parse_conllu(block);
    block.clear();
  };

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.rfind("# review_id =", 0) == 0) {
      flush();
      std::istringstream ss(line);
      std::string hash, key, eq, id, sent_kw, eq2;
      long n;
      if (!(ss >> hash >> key >> eq >> id >> sent_kw >> eq2 >> n) ||
          sent_kw != "sent")
        throw DataError("MalformedLine: " + line);
      review_id = id;
      sent_no = n;
      continue;
    }
    if (line[0] == '#') continue;
    block += line;
    block += '\n';
  }
  flush();
  for (auto& [id, sentences] : staged) {
    auto& vec = map[id];
    for (auto& [n, tree] : sentences) vec.push_back(std::move(tree));
  }
  return map;
}

}  // namespace revmatch::deptree
