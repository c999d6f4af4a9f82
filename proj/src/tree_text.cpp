#include "treeglc/tree_text.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "treeglc/error.hpp"

namespace treeglc {

std::map<std::string, std::string> default_aliases() {
  return {
      {"Protine", "proline"},
      {"Matic-Acid", "malic_acid"},
      {"Toat-Phenols", "total_phenols"},
      {"Color-intensity", "color_intensity"},
      {"Flavanoids", "flavanoids"},
      {"Alcohol", "alcohol"},
  };
}

namespace {

constexpr std::string_view kGreaterEqualUtf8 = "\xE2\x89\xA5";  // ≥

enum class Op { less, greater_equal };

struct LeafClause {
  std::string label;
  double purity = 0.0;
  std::size_t support = 0;
};

struct Line {
  std::size_t number = 0;  // 1-based source line
  std::size_t level = 0;
  bool leaf_only = false;  // "then class = ..." without a condition
  std::string attribute;
  Op op = Op::less;
  double threshold = 0.0;
  std::string threshold_text;
  std::optional<LeafClause> leaf;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// Cursor over one line's content with column tracking for error messages.
class Cursor {
 public:
  Cursor(std::string_view s, std::size_t line, std::size_t col0)
      : s_(s), line_(line), col0_(col0) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line_, col0_ + pos_ + 1, msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool peek(std::string_view lit) const { return s_.substr(pos_, lit.size()) == lit; }
  bool accept(std::string_view lit) {
    if (!peek(lit)) return false;
    pos_ += lit.size();
    return true;
  }
  void expect(std::string_view lit) {
    skip_ws();
    if (!accept(lit)) fail("expected '" + std::string(lit) + "'");
  }
  std::string_view word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !is_space(s_[pos_]) && s_[pos_] != '(' && s_[pos_] != '=') ++pos_;
    return s_.substr(start, pos_ - start);
  }
  double number(const char* what) {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !is_space(s_[pos_]) && s_[pos_] != '(' && s_[pos_] != ')') ++pos_;
    auto tok = s_.substr(start, pos_ - start);
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size() || !std::isfinite(v)) {
      pos_ = start;
      fail(std::string("non-numeric ") + what + " '" + std::string(tok) + "'");
    }
    last_token_ = tok;
    return v;
  }
  std::string_view last_token() const { return last_token_; }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  std::string_view rest() const { return s_.substr(pos_); }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t col0_;
  std::size_t pos_ = 0;
  std::string_view last_token_;
};

std::string strip_emphasis(std::string_view s) {
  while (s.size() >= 2 && s.front() == '*' && s.back() == '*') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

LeafClause parse_leaf_clause(Cursor& cur) {
  cur.expect("then");
  const auto kw = cur.word();
  if (kw != "class" && kw != "classe") cur.fail("expected 'class' or 'classe'");
  cur.expect("=");
  LeafClause leaf;
  leaf.label = strip_emphasis(cur.word());
  if (leaf.label.empty()) cur.fail("missing class name");
  cur.expect("(");
  leaf.purity = cur.number("purity");
  if (leaf.purity < 0.0 || leaf.purity > 100.0) cur.fail("purity outside [0, 100]");
  cur.expect("%");
  cur.expect("of");
  const double support = cur.number("support");
  if (support < 0.0 || support != std::floor(support)) cur.fail("support must be a whole number");
  leaf.support = static_cast<std::size_t>(support);
  const auto unit = cur.word();
  if (unit != "cases" && unit != "examples") {
    // "examples)" arrives as one token when no space precedes the parenthesis.
    if (unit != "cases)" && unit != "examples)") cur.fail("expected 'cases' or 'examples'");
  } else {
    cur.expect(")");
  }
  if (!cur.done()) cur.fail("unexpected text after leaf clause");
  return leaf;
}

Line lex_line(std::string_view raw, std::size_t number) {
  Line line;
  line.number = number;
  std::size_t i = 0;
  std::size_t spaces = 0;
  std::size_t tabs = 0;
  while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) {
    (raw[i] == '\t' ? tabs : spaces) += 1;
    ++i;
  }
  if (spaces % 2 != 0) {
    throw ParseError(number, i, "indentation must be a multiple of two spaces");
  }
  line.level = tabs + spaces / 2;
  if (i < raw.size() && raw[i] == '-' && (i + 1 == raw.size() || is_space(raw[i + 1]))) ++i;

  Cursor cur(raw.substr(i), number, i);
  cur.skip_ws();
  if (cur.peek("then")) {
    line.leaf_only = true;
    line.leaf = parse_leaf_clause(cur);
    return line;
  }

  // Attribute runs up to the comparison operator.
  const auto content = cur.rest();
  std::size_t op_at = std::string_view::npos;
  for (std::size_t k = 0; k < content.size(); ++k) {
    if (content[k] == '<' || content[k] == '>' || content.substr(k, 3) == kGreaterEqualUtf8) {
      op_at = k;
      break;
    }
  }
  if (op_at == std::string_view::npos) cur.fail("expected a condition 'attribute < value'");
  std::string_view attr = content.substr(0, op_at);
  while (!attr.empty() && is_space(attr.back())) attr.remove_suffix(1);
  if (attr.empty()) cur.fail("missing attribute name");
  line.attribute = std::string(attr);
  cur.seek(cur.pos() + op_at);
  if (cur.accept(">=") || cur.accept(kGreaterEqualUtf8)) {
    line.op = Op::greater_equal;
  } else if (cur.peek("<=") || cur.peek(">")) {
    cur.fail("unsupported operator; expected '<' or '>='");
  } else {
    cur.accept("<");
    line.op = Op::less;
  }
  line.threshold = cur.number("threshold");
  line.threshold_text = std::string(cur.last_token());
  if (!cur.done()) line.leaf = parse_leaf_clause(cur);
  return line;
}

class TreeParser {
 public:
  TreeParser(std::vector<Line> lines, const TreeTextOptions& opts)
      : lines_(std::move(lines)), opts_(opts) {}

  DecisionTree run() {
    if (lines_.empty()) throw ParseError(1, 0, "empty tree document");
    if (lines_.front().leaf_only) {
      if (lines_.size() > 1) {
        throw ParseError(lines_[1].number, 0, "a bare leaf clause must be the only line");
      }
      const auto& leaf = *lines_.front().leaf;
      tree_.nodes[0] = TreeNode::make_leaf(0, leaf.label, leaf.support, leaf.purity);
      tree_.root = 0;
      return std::move(tree_);
    }
    if (lines_.front().level != 0) {
      throw ParseError(lines_.front().number, 0, "first condition must not be indented");
    }
    tree_.root = parse_pair(0);
    if (pos_ < lines_.size()) {
      throw ParseError(lines_[pos_].number, 0, "unmatched branch: the root already has two branches");
    }
    return std::move(tree_);
  }

 private:
  std::string canonical(const std::string& attr) const {
    auto it = opts_.aliases.find(attr);
    return it == opts_.aliases.end() ? attr : it->second;
  }

  // Subtree hanging below the condition at line index `head`.
  NodeId parse_branch(std::size_t head) {
    const Line& h = lines_[head];
    if (h.leaf) {
      if (pos_ < lines_.size() && lines_[pos_].level > h.level) {
        throw ParseError(lines_[pos_].number, 0, "condition with a leaf clause cannot have nested lines");
      }
      const NodeId id = next_++;
      tree_.nodes[id] = TreeNode::make_leaf(id, h.leaf->label, h.leaf->support, h.leaf->purity);
      return id;
    }
    if (pos_ >= lines_.size() || lines_[pos_].level <= h.level) {
      throw ParseError(h.number, 0, "condition has neither a leaf clause nor nested conditions");
    }
    if (lines_[pos_].level > h.level + 1) {
      throw ParseError(lines_[pos_].number, 0, "indentation jumps by more than one level");
    }
    return parse_pair(h.level + 1);
  }

  NodeId parse_pair(std::size_t level) {
    const std::size_t first = pos_;
    const Line& a = lines_[first];
    if (a.leaf_only) throw ParseError(a.number, 0, "bare leaf clause inside a tree");
    if (a.level != level) throw ParseError(a.number, 0, "unexpected indentation");
    const NodeId id = next_++;
    tree_.nodes[id] = TreeNode{};  // reserve preorder id
    ++pos_;
    const NodeId first_child = parse_branch(first);

    if (pos_ >= lines_.size() || lines_[pos_].level != level) {
      throw ParseError(a.number, 0, "unmatched branch: no partner condition for '" + a.attribute + "'");
    }
    const std::size_t second = pos_;
    const Line& b = lines_[second];
    if (b.leaf_only) throw ParseError(b.number, 0, "bare leaf clause inside a tree");
    if (b.attribute != a.attribute) {
      throw ParseError(b.number, 0, "branch pair mixes attributes '" + a.attribute + "' and '" + b.attribute + "'");
    }
    if (b.threshold != a.threshold) {
      throw ParseError(b.number, 0, "branch pair thresholds differ (" + a.threshold_text + " vs " +
                                        b.threshold_text + ")");
    }
    if (b.op == a.op) throw ParseError(b.number, 0, "branch pair must combine '<' and '>='");
    ++pos_;
    const NodeId second_child = parse_branch(second);

    const std::size_t attr = tree_.intern_attribute(canonical(a.attribute));
    const NodeId left = a.op == Op::less ? first_child : second_child;
    const NodeId right = a.op == Op::less ? second_child : first_child;
    tree_.nodes[id] = TreeNode::make_split(id, attr, a.threshold, left, right);
    return id;
  }

  std::vector<Line> lines_;
  const TreeTextOptions& opts_;
  DecisionTree tree_;
  std::size_t pos_ = 0;
  NodeId next_ = 0;
};

std::string fixed(double v, int decimals) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string s(buf, p);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace

DecisionTree parse_tree_text(std::string_view text, const TreeTextOptions& opts) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view raw = text.substr(start, end - start);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    bool blank = true;
    for (char c : raw) blank = blank && is_space(c);
    if (!blank) lines.push_back(lex_line(raw, number));
    start = end + 1;
  }
  return TreeParser(std::move(lines), opts).run();
}

std::string serialize_tree_text(const DecisionTree& t) {
  t.validate();
  std::ostringstream out;
  auto leaf_clause = [&](const TreeNode& n) {
    out << "then class = " << n.label << " (" << fixed(n.purity, 2) << " % of " << n.support
        << " examples)";
  };
  const auto& root = t.node(t.root);
  if (root.is_leaf()) {
    leaf_clause(root);
    out << '\n';
    return out.str();
  }
  auto emit = [&](auto&& self, NodeId id, std::size_t level) -> void {
    const auto& n = t.node(id);
    for (Side side : {Side::left, Side::right}) {
      out << std::string(2 * level, ' ') << "- " << t.attribute_names[n.attribute]
          << (side == Side::left ? " < " : " >= ") << fixed(n.threshold, 4);
      const auto& child = t.node(n.child(side));
      if (child.is_leaf()) {
        out << ' ';
        leaf_clause(child);
        out << '\n';
      } else {
        out << '\n';
        self(self, child.id, level + 1);
      }
    }
  };
  emit(emit, t.root, 0);
  return out.str();
}

}  // namespace treeglc
