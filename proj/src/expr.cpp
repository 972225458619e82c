#include "kvf/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <type_traits>

#include "kvf/errors.hpp"
#include "kvf/format.hpp"

namespace kvf {

namespace {

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  TokKind kind;
  std::size_t offset;
  std::string text;   // identifier name
  double number = 0;  // numeric value
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          ++k;
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      const std::string text(src.substr(i, j - i));
      const double value = std::strtod(text.c_str(), nullptr);
      if (!std::isfinite(value)) throw ParseError("numeric literal out of range", i);
      out.push_back({TokKind::Number, i, text, value});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({TokKind::Ident, i, std::string(src.substr(i, j - i)), 0});
      i = j;
      continue;
    }
    TokKind k;
    switch (c) {
      case '+': k = TokKind::Plus; break;
      case '-': k = TokKind::Minus; break;
      case '*': k = TokKind::Star; break;
      case '/': k = TokKind::Slash; break;
      case '^': k = TokKind::Caret; break;
      case '(': k = TokKind::LParen; break;
      case ')': k = TokKind::RParen; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back({k, i, std::string(1, c), 0});
    ++i;
  }
  out.push_back({TokKind::End, src.size(), "", 0});
  return out;
}

NodeKind function_kind(const std::string& name) {
  if (name == "sin") return NodeKind::Sin;
  if (name == "cos") return NodeKind::Cos;
  if (name == "tan") return NodeKind::Tan;
  if (name == "exp") return NodeKind::Exp;
  if (name == "log") return NodeKind::Log;
  if (name == "sqrt") return NodeKind::Sqrt;
  if (name == "sinh") return NodeKind::Sinh;
  if (name == "cosh") return NodeKind::Cosh;
  return NodeKind::Number;  // sentinel: not a function
}

bool is_function(const std::string& name) {
  return function_kind(name) != NodeKind::Number;
}

}  // namespace

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& coords)
      : tokens_(lex(src)), coords_(coords) {}

  Expression run() {
    Expression e;
    e.coords_ = coords_;
    nodes_ = &e.nodes_;
    e.root_ = parse_expr();
    if (peek().kind != TokKind::End)
      throw ParseError("unexpected trailing input", peek().offset);
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  int add(ExprNode n) {
    nodes_->push_back(n);
    return static_cast<int>(nodes_->size()) - 1;
  }

  int parse_expr() {
    int left = parse_term();
    while (peek().kind == TokKind::Plus || peek().kind == TokKind::Minus) {
      const bool plus = advance().kind == TokKind::Plus;
      const int right = parse_term();
      left = add({plus ? NodeKind::Add : NodeKind::Sub, left, right, 0.0, -1});
    }
    return left;
  }

  int parse_term() {
    int left = parse_factor();
    while (peek().kind == TokKind::Star || peek().kind == TokKind::Slash) {
      const bool mul = advance().kind == TokKind::Star;
      const int right = parse_factor();
      left = add({mul ? NodeKind::Mul : NodeKind::Div, left, right, 0.0, -1});
    }
    return left;
  }

  int parse_factor() {
    if (peek().kind == TokKind::Minus) {
      advance();
      const int operand = parse_factor();
      return add({NodeKind::Neg, operand, -1, 0.0, -1});
    }
    const int base = parse_base();
    if (peek().kind == TokKind::Caret) {
      advance();
      if (peek().kind != TokKind::Number)
        throw ParseError("expected numeric exponent after '^'", peek().offset);
      const double exponent = advance().number;
      return add({NodeKind::Pow, base, -1, exponent, -1});
    }
    return base;
  }

  int parse_base() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::Number: {
        advance();
        return add({NodeKind::Number, -1, -1, t.number, -1});
      }
      case TokKind::Ident: {
        advance();
        if (peek().kind == TokKind::LParen) {
          if (!is_function(t.text))
            throw ParseError("unknown function '" + t.text + "'", t.offset);
          advance();
          const int arg = parse_expr();
          expect(TokKind::RParen, "expected ')'");
          return add({function_kind(t.text), arg, -1, 0.0, -1});
        }
        for (std::size_t i = 0; i < coords_.size(); ++i) {
          if (coords_[i] == t.text)
            return add({NodeKind::Variable, -1, -1, 0.0, static_cast<int>(i)});
        }
        throw UndeclaredVariableError(t.text);
      }
      case TokKind::LParen: {
        advance();
        const int inner = parse_expr();
        expect(TokKind::RParen, "expected ')'");
        return inner;
      }
      default:
        throw ParseError("expected expression", t.offset);
    }
  }

  void expect(TokKind k, const char* msg) {
    if (peek().kind != k) throw ParseError(msg, peek().offset);
    advance();
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const std::vector<std::string>& coords_;
  std::vector<ExprNode>* nodes_ = nullptr;
};

Expression Expression::parse(std::string_view source, const std::vector<std::string>& coords) {
  if (source.empty()) throw ParseError("empty expression", 0);
  return Parser(source, coords).run();
}

std::string Expression::serialize_node(int node) const {
  const ExprNode& n = nodes_[node];
  switch (n.kind) {
    case NodeKind::Number: return format_g17(n.number);
    case NodeKind::Variable: return coords_[n.var];
    case NodeKind::Neg: return "(-" + serialize_node(n.a) + ")";
    case NodeKind::Sin: return "sin(" + serialize_node(n.a) + ")";
    case NodeKind::Cos: return "cos(" + serialize_node(n.a) + ")";
    case NodeKind::Tan: return "tan(" + serialize_node(n.a) + ")";
    case NodeKind::Exp: return "exp(" + serialize_node(n.a) + ")";
    case NodeKind::Log: return "log(" + serialize_node(n.a) + ")";
    case NodeKind::Sqrt: return "sqrt(" + serialize_node(n.a) + ")";
    case NodeKind::Sinh: return "sinh(" + serialize_node(n.a) + ")";
    case NodeKind::Cosh: return "cosh(" + serialize_node(n.a) + ")";
    case NodeKind::Add: return "(" + serialize_node(n.a) + " + " + serialize_node(n.b) + ")";
    case NodeKind::Sub: return "(" + serialize_node(n.a) + " - " + serialize_node(n.b) + ")";
    case NodeKind::Mul: return "(" + serialize_node(n.a) + " * " + serialize_node(n.b) + ")";
    case NodeKind::Div: return "(" + serialize_node(n.a) + " / " + serialize_node(n.b) + ")";
    case NodeKind::Pow:
      return "(" + serialize_node(n.a) + "^" + format_g17(n.number) + ")";
  }
  return "";
}

namespace {

bool integer_exponent(double p) { return p == std::floor(p); }

}  // namespace

template <class T>
T Expression::eval_impl(const Eigen::VectorXd& x) const {
  constexpr bool is_jet = std::is_same_v<T, Jet2>;
  const int n = dimension();
  std::vector<T> val(nodes_.size());
  for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
    const ExprNode& node = nodes_[idx];
    const int i = static_cast<int>(idx);
    auto value_of = [&](const T& t) -> double {
      if constexpr (is_jet)
        return t.v;
      else
        return static_cast<double>(t);
    };
    switch (node.kind) {
      case NodeKind::Number:
        if constexpr (is_jet)
          val[i] = Jet2::constant(node.number, n);
        else
          val[i] = static_cast<T>(node.number);
        break;
      case NodeKind::Variable:
        if constexpr (is_jet)
          val[i] = Jet2::variable(x(node.var), node.var, n);
        else
          val[i] = static_cast<T>(x(node.var));
        break;
      case NodeKind::Neg: val[i] = -val[node.a]; break;
      case NodeKind::Sin: {
        using std::sin;
        val[i] = sin(val[node.a]);
        break;
      }
      case NodeKind::Cos: {
        using std::cos;
        val[i] = cos(val[node.a]);
        break;
      }
      case NodeKind::Tan: {
        using std::tan;
        val[i] = tan(val[node.a]);
        break;
      }
      case NodeKind::Exp: {
        using std::exp;
        val[i] = exp(val[node.a]);
        break;
      }
      case NodeKind::Log: {
        if (value_of(val[node.a]) <= 0.0)
          throw EvalDomainError("log of non-positive value", serialize_node(i));
        using std::log;
        val[i] = log(val[node.a]);
        break;
      }
      case NodeKind::Sqrt: {
        const double v = value_of(val[node.a]);
        if (v < 0.0) throw EvalDomainError("sqrt of negative value", serialize_node(i));
        if (is_jet && v == 0.0)
          throw EvalDomainError("sqrt derivative singular at zero", serialize_node(i));
        using std::sqrt;
        val[i] = sqrt(val[node.a]);
        break;
      }
      case NodeKind::Sinh: {
        using std::sinh;
        val[i] = sinh(val[node.a]);
        break;
      }
      case NodeKind::Cosh: {
        using std::cosh;
        val[i] = cosh(val[node.a]);
        break;
      }
      case NodeKind::Add: val[i] = val[node.a] + val[node.b]; break;
      case NodeKind::Sub: val[i] = val[node.a] - val[node.b]; break;
      case NodeKind::Mul: val[i] = val[node.a] * val[node.b]; break;
      case NodeKind::Div: {
        if (value_of(val[node.b]) == 0.0)
          throw EvalDomainError("division by zero", serialize_node(i));
        val[i] = val[node.a] / val[node.b];
        break;
      }
      case NodeKind::Pow: {
        const double base = value_of(val[node.a]);
        const double p = node.number;
        if (base < 0.0 && !integer_exponent(p))
          throw EvalDomainError("negative base with non-integer exponent", serialize_node(i));
        if (base == 0.0 && p < 0.0)
          throw EvalDomainError("zero base with negative exponent", serialize_node(i));
        if (is_jet && base == 0.0 && p != 0.0 && p != 1.0 &&
            !(integer_exponent(p) && p >= 2.0))
          throw EvalDomainError("power derivative singular at zero", serialize_node(i));
        if constexpr (is_jet) {
          val[i] = pow(val[node.a], p);
        } else {
          using std::pow;
          val[i] = pow(val[node.a], static_cast<T>(p));
        }
        break;
      }
    }
  }
  return val[root_];
}

double Expression::eval(const Eigen::VectorXd& x) const { return eval_impl<double>(x); }

long double Expression::eval_longdouble(const Eigen::VectorXd& x) const {
  return eval_impl<long double>(x);
}

Jet2 Expression::eval_jet2(const Eigen::VectorXd& x) const { return eval_impl<Jet2>(x); }

bool Expression::same_structure_node(int node, const Expression& other, int other_node) const {
  const ExprNode& a = nodes_[node];
  const ExprNode& b = other.nodes_[other_node];
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Number: return a.number == b.number;
    case NodeKind::Variable: return a.var == b.var;
    case NodeKind::Pow:
      return a.number == b.number && same_structure_node(a.a, other, b.a);
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
      return same_structure_node(a.a, other, b.a) && same_structure_node(a.b, other, b.b);
    default:
      return same_structure_node(a.a, other, b.a);
  }
}

bool Expression::same_structure(const Expression& other) const {
  if (coords_ != other.coords_) return false;
  return same_structure_node(root_, other, other.root_);
}

}  // namespace kvf
