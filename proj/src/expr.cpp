#include "evouct/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <system_error>

namespace evouct {

namespace {

constexpr double kProtectionThreshold = 0.001;
constexpr double kLargest = std::numeric_limits<double>::max();

// Keeps every intermediate finite. Without this a depth-8 product of visit
// counts overflows and a later subtraction turns inf into NaN.
double saturate(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, -kLargest, kLargest);
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Q: return "Q";
    case Op::NParent: return "Np";
    case Op::NChild: return "Nc";
    case Op::Const: return "k";
  }
  return "?";
}

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), end);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::vector<Token> parse() {
    std::vector<Token> out;
    parse_node(out);
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return out;
  }

 private:
  void parse_node(std::vector<Token>& out) {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (text_[pos_] != '(') {
      const auto word = read_word();
      if (word == "Q") {
        out.push_back({Op::Q});
      } else if (word == "Np") {
        out.push_back({Op::NParent});
      } else if (word == "Nc") {
        out.push_back({Op::NChild});
      } else {
        fail("unknown terminal '" + std::string(word) + "'");
      }
      return;
    }
    ++pos_;
    const auto head = read_word();
    if (head == "k") {
      skip_space();
      const auto number = read_word();
      double v = 0.0;
      auto [end, ec] = std::from_chars(number.data(), number.data() + number.size(), v);
      if (ec != std::errc{} || end != number.data() + number.size()) {
        fail("bad constant '" + std::string(number) + "'");
      }
      out.push_back({Op::Const, v});
    } else {
      Op op{};
      if (head == "add") op = Op::Add;
      else if (head == "sub") op = Op::Sub;
      else if (head == "mul") op = Op::Mul;
      else if (head == "div") op = Op::Div;
      else if (head == "log") op = Op::Log;
      else if (head == "sqrt") op = Op::Sqrt;
      else fail("unknown operator '" + std::string(head) + "'");
      out.push_back({op});
      for (int i = 0; i < arity(op); ++i) parse_node(out);
    }
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
    ++pos_;
  }

  std::string_view read_word() {
    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) fail("expected a token");
    return text_.substr(start, pos_ - start);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression parse error at offset " + std::to_string(pos_) +
                                ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Op random_terminal_op(Rng& rng) {
  static constexpr std::array<Op, 4> kTerminals{Op::Q, Op::NParent, Op::NChild, Op::Const};
  return kTerminals[pick_index(rng, kTerminals.size())];
}

Op random_function_op(Rng& rng) {
  static constexpr std::array<Op, 6> kFunctions{Op::Add, Op::Sub, Op::Mul,
                                                Op::Div, Op::Log, Op::Sqrt};
  return kFunctions[pick_index(rng, kFunctions.size())];
}

void grow(std::vector<Token>& out, std::size_t remaining_depth, Rng& rng) {
  if (remaining_depth <= 1 || uniform01(rng) >= 0.5) {
    const Op op = random_terminal_op(rng);
    const double value =
        op == Op::Const ? kConstantSet[pick_index(rng, kConstantSet.size())] : 0.0;
    out.push_back({op, value});
    return;
  }
  const Op op = random_function_op(rng);
  out.push_back({op});
  for (int i = 0; i < arity(op); ++i) grow(out, remaining_depth - 1, rng);
}

}  // namespace

double protected_div(double x, double y) {
  if (std::abs(y) < kProtectionThreshold) return 1.0;
  return x / y;
}

double protected_log(double x) {
  const double m = std::abs(x);
  if (m < kProtectionThreshold) return 0.0;
  return std::log(m);
}

double protected_sqrt(double x) { return std::sqrt(std::abs(x)); }

Expression::Expression(std::vector<Token> prefix) : prefix_(std::move(prefix)) {
  if (prefix_.empty()) throw std::invalid_argument("empty expression");
  // Walk once, tracking how many operands are still owed.
  std::size_t owed = 1;
  for (std::size_t i = 0; i < prefix_.size(); ++i) {
    if (owed == 0) throw std::invalid_argument("expression has trailing tokens");
    const Token& t = prefix_[i];
    if (t.op == Op::Const && !(t.value > 0.0 && std::isfinite(t.value))) {
      throw std::invalid_argument("constants must be positive and finite");
    }
    owed = owed - 1 + static_cast<std::size_t>(arity(t.op));
  }
  if (owed != 0) throw std::invalid_argument("expression is missing operands");
  if (depth() > kMaxExpressionDepth) {
    throw std::invalid_argument("expression depth " + std::to_string(depth()) +
                                " exceeds the cap of " + std::to_string(kMaxExpressionDepth));
  }
}

Expression Expression::terminal(Op op, double value) {
  if (is_function(op)) throw std::invalid_argument("terminal() needs a terminal op");
  return Expression({Token{op, op == Op::Const ? value : 0.0}});
}

std::size_t Expression::depth() const {
  // Stack of remaining-children counters, one per open function node.
  std::vector<int> open;
  std::size_t deepest = 0;
  for (const Token& t : prefix_) {
    deepest = std::max(deepest, open.size() + 1);
    if (is_function(t.op)) {
      open.push_back(arity(t.op));
      continue;
    }
    while (!open.empty() && --open.back() == 0) open.pop_back();
  }
  return deepest;
}

std::size_t Expression::depth_at(std::size_t pos) const {
  std::vector<int> open;
  for (std::size_t i = 0; i < pos; ++i) {
    if (is_function(prefix_[i].op)) {
      open.push_back(arity(prefix_[i].op));
      continue;
    }
    while (!open.empty() && --open.back() == 0) open.pop_back();
  }
  return open.size() + 1;
}

std::size_t Expression::subtree_end(std::size_t pos) const {
  std::size_t owed = 1;
  std::size_t i = pos;
  while (owed > 0) {
    owed = owed - 1 + static_cast<std::size_t>(arity(prefix_[i].op));
    ++i;
  }
  return i;
}

Expression Expression::replace_subtree(std::size_t pos, const Expression& donor) const {
  const std::size_t end = subtree_end(pos);
  std::vector<Token> out;
  out.reserve(prefix_.size() - (end - pos) + donor.size());
  out.insert(out.end(), prefix_.begin(), prefix_.begin() + static_cast<std::ptrdiff_t>(pos));
  out.insert(out.end(), donor.prefix_.begin(), donor.prefix_.end());
  out.insert(out.end(), prefix_.begin() + static_cast<std::ptrdiff_t>(end), prefix_.end());
  return Expression(std::move(out));
}

double Expression::evaluate(const NodeContext& ctx) const {
  // Reverse prefix walk; operands of a function sit on top of the stack in
  // argument order. A depth-8 tree has at most 128 leaves.
  std::array<double, 1u << kMaxExpressionDepth> stack{};
  std::size_t top = 0;
  for (auto it = prefix_.rbegin(); it != prefix_.rend(); ++it) {
    double v = 0.0;
    switch (it->op) {
      case Op::Q: v = ctx.q; break;
      case Op::NParent: v = ctx.n_parent; break;
      case Op::NChild: v = ctx.n_child; break;
      case Op::Const: v = it->value; break;
      case Op::Log: v = protected_log(stack[--top]); break;
      case Op::Sqrt: v = protected_sqrt(stack[--top]); break;
      default: {
        const double a = stack[--top];
        const double b = stack[--top];
        switch (it->op) {
          case Op::Add: v = a + b; break;
          case Op::Sub: v = a - b; break;
          case Op::Mul: v = a * b; break;
          default: v = protected_div(a, b); break;
        }
      }
    }
    stack[top++] = saturate(v);
  }
  return stack[0];
}

std::string Expression::to_string() const {
  std::string out;
  std::vector<int> open;
  for (const Token& t : prefix_) {
    if (!open.empty() && out.back() != '(') out += ' ';
    if (t.op == Op::Const) {
      out += "(k ";
      append_number(out, t.value);
      out += ')';
    } else if (is_function(t.op)) {
      out += '(';
      out += op_name(t.op);
      open.push_back(arity(t.op));
      continue;
    } else {
      out += op_name(t.op);
    }
    while (!open.empty() && --open.back() == 0) {
      open.pop_back();
      out += ')';
    }
  }
  return out;
}

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }

Expression uct_seed(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("uct_seed needs a positive constant");
  return Expression({
      {Op::Add},
      {Op::Q},
      {Op::Mul},
      {Op::Const, c},
      {Op::Sqrt},
      {Op::Div},
      {Op::Mul},
      {Op::Const, 2.0},
      {Op::Log},
      {Op::NParent},
      {Op::NChild},
  });
}

double uct_score(const NodeContext& ctx, double c) {
  return ctx.q + c * std::sqrt(2.0 * std::log(ctx.n_parent) / ctx.n_child);
}

Expression random_subtree(std::size_t max_depth, Rng& rng) {
  if (max_depth < 1 || max_depth > kMaxExpressionDepth) {
    throw std::invalid_argument("random_subtree depth must be in [1, " +
                                std::to_string(kMaxExpressionDepth) + "]");
  }
  std::vector<Token> out;
  grow(out, max_depth, rng);
  return Expression(std::move(out));
}

std::size_t choose_mutation_point(const Expression& e, Rng& rng) {
  std::vector<std::size_t> internal;
  std::vector<std::size_t> leaves;
  const auto tokens = e.tokens();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    (is_function(tokens[i].op) ? internal : leaves).push_back(i);
  }
  if (!internal.empty() && uniform01(rng) < 0.9) {
    return internal[pick_index(rng, internal.size())];
  }
  return leaves[pick_index(rng, leaves.size())];
}

Expression mutate(const Expression& e, Rng& rng, std::size_t max_depth) {
  const std::size_t point = choose_mutation_point(e, rng);
  const std::size_t budget = max_depth + 1 - e.depth_at(point);
  return e.replace_subtree(point, random_subtree(budget, rng));
}

}  // namespace evouct
