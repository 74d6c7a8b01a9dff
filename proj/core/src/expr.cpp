#include "fracvar/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <algorithm>
#include <string>

namespace fracvar {

std::string VarId::name() const {
  switch (kind) {
    case VarKind::x: return "x";
    case VarKind::y: return "y" + std::to_string(index);
    case VarKind::dy: return "D[y" + std::to_string(index) + "]";
    case VarKind::lam: return "lam" + std::to_string(index);
  }
  return "?";
}

Expr Expr::constant(double value) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{Constant{value}}));
}

Expr Expr::variable(VarId id) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{Variable{id}}));
}

Expr Expr::unary(UnaryOp op, Expr child) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{Unary{op, std::move(child)}}));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Expr(std::make_shared<const ExprNode>(
      ExprNode{Binary{op, std::move(lhs), std::move(rhs)}}));
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::size_t Expr::max_index(VarKind kind) const {
  return std::visit(
      Overloaded{
          [](const Constant&) -> std::size_t { return 0; },
          [&](const Variable& v) -> std::size_t {
            return v.id.kind == kind ? v.id.index : 0;
          },
          [&](const Unary& u) { return u.child.max_index(kind); },
          [&](const Binary& b) {
            return std::max(b.lhs.max_index(kind), b.rhs.max_index(kind));
          },
      },
      node_->v);
}

bool Expr::depends_on(VarId id) const {
  return std::visit(
      Overloaded{
          [](const Constant&) { return false; },
          [&](const Variable& v) { return v.id == id; },
          [&](const Unary& u) { return u.child.depends_on(id); },
          [&](const Binary& b) { return b.lhs.depends_on(id) || b.rhs.depends_on(id); },
      },
      node_->v);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::size_t n_components, std::size_t n_multipliers)
      : text_(text), n_(n_components), r_(n_multipliers) {}

  Expr run() {
    skip_ws();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) {
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) {
        throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
      }
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(BinaryOp::add, lhs, term());
      } else if (accept('-')) {
        lhs = Expr::binary(BinaryOp::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(BinaryOp::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = Expr::binary(BinaryOp::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) {
      // Negated literals become negative constants so printed trees re-parse
      // to the same shape.
      Expr child = unary();
      if (const auto* c = std::get_if<Constant>(&child.node().v)) return Expr::constant(-c->value);
      return Expr::unary(UnaryOp::neg, child);
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(BinaryOp::pow, base, unary());
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      throw ParseError("malformed number", start);
    }
    return Expr::constant(value);
  }

  std::size_t index_suffix(std::string_view word, std::size_t prefix_len,
                           std::size_t start, std::size_t limit, const char* what) {
    const std::string_view digits = word.substr(prefix_len);
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw ParseError("unknown identifier '" + std::string(word) + "'", start);
    }
    if (idx < 1 || idx > limit) {
      throw ParseError(std::string(what) + " index " + std::to_string(idx) +
                           " out of declared range 1.." + std::to_string(limit),
                       start);
    }
    return idx;
  }

  static bool is_indexed(std::string_view word, std::string_view prefix) {
    if (word.size() <= prefix.size() || word.substr(0, prefix.size()) != prefix) return false;
    return std::all_of(word.begin() + static_cast<std::ptrdiff_t>(prefix.size()), word.end(),
                       [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
  }

  std::string_view word() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    const std::string_view w = word();

    static constexpr std::array<std::pair<std::string_view, UnaryOp>, 5> kFunctions = {{
        {"sin", UnaryOp::sin},
        {"cos", UnaryOp::cos},
        {"exp", UnaryOp::exp},
        {"log", UnaryOp::log},
        {"sqrt", UnaryOp::sqrt},
    }};
    for (const auto& [name, op] : kFunctions) {
      if (w == name) {
        expect('(');
        Expr arg = expr();
        expect(')');
        return Expr::unary(op, arg);
      }
    }

    if (w == "x") return Expr::variable(VarId::x());
    if (w == "D") {
      expect('[');
      skip_ws();
      const std::size_t inner = pos_;
      const std::string_view v = word();
      if (!is_indexed(v, "y")) {
        throw ParseError("D[...] must wrap a trajectory component y<i>", inner);
      }
      const std::size_t i = index_suffix(v, 1, inner, n_, "component");
      expect(']');
      return Expr::variable(VarId::dy(i));
    }
    if (is_indexed(w, "y")) return Expr::variable(VarId::y(index_suffix(w, 1, start, n_, "component")));
    if (is_indexed(w, "lam")) {
      return Expr::variable(VarId::lam(index_suffix(w, 3, start, r_, "multiplier")));
    }
    throw ParseError("unknown identifier '" + std::string(w) + "'", start);
  }

  std::string_view text_;
  std::size_t n_;
  std::size_t r_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, std::size_t n_components, std::size_t n_multipliers) {
  return Parser(text, n_components, n_multipliers).run();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double checked(double v, const char* op) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + op);
  return v;
}

double lookup(std::span<const double> values, std::size_t index, const VarId& id) {
  if (index == 0 || index > values.size()) {
    throw PreconditionError("environment has no value for " + id.name());
  }
  return values[index - 1];
}

}  // namespace

double eval(const Expr& e, const EvalEnv& env) {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.value; },
          [&](const Variable& v) {
            switch (v.id.kind) {
              case VarKind::x: return env.x;
              case VarKind::y: return lookup(env.y, v.id.index, v.id);
              case VarKind::dy: return lookup(env.dy, v.id.index, v.id);
              case VarKind::lam: return lookup(env.lam, v.id.index, v.id);
            }
            return 0.0;
          },
          [&](const Unary& u) {
            const double a = eval(u.child, env);
            switch (u.op) {
              case UnaryOp::neg: return -a;
              case UnaryOp::sin: return std::sin(a);
              case UnaryOp::cos: return std::cos(a);
              case UnaryOp::exp: return checked(std::exp(a), "exp");
              case UnaryOp::log:
                if (!(a > 0.0)) throw EvalError("log of non-positive argument");
                return std::log(a);
              case UnaryOp::sqrt:
                if (a < 0.0) throw EvalError("sqrt of negative argument");
                return std::sqrt(a);
            }
            return 0.0;
          },
          [&](const Binary& b) {
            const double l = eval(b.lhs, env);
            const double r = eval(b.rhs, env);
            switch (b.op) {
              case BinaryOp::add: return checked(l + r, "+");
              case BinaryOp::sub: return checked(l - r, "-");
              case BinaryOp::mul: return checked(l * r, "*");
              case BinaryOp::div:
                if (r == 0.0) throw EvalError("division by zero");
                return checked(l / r, "/");
              case BinaryOp::pow:
                if (l < 0.0 && r != std::trunc(r)) {
                  throw EvalError("negative base with non-integer exponent");
                }
                if (l == 0.0 && r < 0.0) throw EvalError("zero raised to a negative power");
                return checked(std::pow(l, r), "^");
            }
            return 0.0;
          },
      },
      e.node().v);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

const double* as_constant(const Expr& e) {
  if (const auto* c = std::get_if<Constant>(&e.node().v)) return &c->value;
  return nullptr;
}

bool is_value(const Expr& e, double v) {
  const double* c = as_constant(e);
  return c != nullptr && *c == v;
}

Expr fold_if_finite(double v, Expr otherwise) {
  return std::isfinite(v) ? Expr::constant(v) : std::move(otherwise);
}

Expr neg(Expr a) {
  if (const double* c = as_constant(a)) return Expr::constant(-*c);
  return Expr::unary(UnaryOp::neg, std::move(a));
}

Expr add(Expr a, Expr b) {
  if (is_value(a, 0.0)) return b;
  if (is_value(b, 0.0)) return a;
  const double* ca = as_constant(a);
  const double* cb = as_constant(b);
  if (ca && cb) return fold_if_finite(*ca + *cb, Expr::binary(BinaryOp::add, a, b));
  return Expr::binary(BinaryOp::add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b) {
  if (is_value(b, 0.0)) return a;
  if (is_value(a, 0.0)) return neg(std::move(b));
  const double* ca = as_constant(a);
  const double* cb = as_constant(b);
  if (ca && cb) return fold_if_finite(*ca - *cb, Expr::binary(BinaryOp::sub, a, b));
  return Expr::binary(BinaryOp::sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b) {
  if (is_value(a, 0.0) || is_value(b, 0.0)) return Expr::constant(0.0);
  if (is_value(a, 1.0)) return b;
  if (is_value(b, 1.0)) return a;
  const double* ca = as_constant(a);
  const double* cb = as_constant(b);
  if (ca && cb) return fold_if_finite(*ca * *cb, Expr::binary(BinaryOp::mul, a, b));
  return Expr::binary(BinaryOp::mul, std::move(a), std::move(b));
}

Expr div(Expr a, Expr b) {
  if (is_value(b, 1.0)) return a;
  if (is_value(a, 0.0) && !is_value(b, 0.0)) return Expr::constant(0.0);
  const double* ca = as_constant(a);
  const double* cb = as_constant(b);
  if (ca && cb && *cb != 0.0) return fold_if_finite(*ca / *cb, Expr::binary(BinaryOp::div, a, b));
  return Expr::binary(BinaryOp::div, std::move(a), std::move(b));
}

Expr pow(Expr a, Expr b) {
  if (is_value(b, 1.0)) return a;
  if (is_value(b, 0.0)) return Expr::constant(1.0);
  return Expr::binary(BinaryOp::pow, std::move(a), std::move(b));
}

Expr fn(UnaryOp op, Expr a) { return Expr::unary(op, std::move(a)); }

}  // namespace

Expr partial(const Expr& e, VarId var) {
  return std::visit(
      Overloaded{
          [](const Constant&) { return Expr::constant(0.0); },
          [&](const Variable& v) { return Expr::constant(v.id == var ? 1.0 : 0.0); },
          [&](const Unary& u) {
            const Expr du = partial(u.child, var);
            if (is_value(du, 0.0)) return Expr::constant(0.0);
            const Expr& a = u.child;
            switch (u.op) {
              case UnaryOp::neg: return neg(du);
              case UnaryOp::sin: return mul(fn(UnaryOp::cos, a), du);
              case UnaryOp::cos: return mul(neg(fn(UnaryOp::sin, a)), du);
              case UnaryOp::exp: return mul(fn(UnaryOp::exp, a), du);
              case UnaryOp::log: return div(du, a);
              case UnaryOp::sqrt:
                return div(du, mul(Expr::constant(2.0), fn(UnaryOp::sqrt, a)));
            }
            return Expr::constant(0.0);
          },
          [&](const Binary& b) {
            const Expr dl = partial(b.lhs, var);
            const Expr dr = partial(b.rhs, var);
            switch (b.op) {
              case BinaryOp::add: return add(dl, dr);
              case BinaryOp::sub: return sub(dl, dr);
              case BinaryOp::mul: return add(mul(dl, b.rhs), mul(b.lhs, dr));
              case BinaryOp::div:
                return div(sub(mul(dl, b.rhs), mul(b.lhs, dr)),
                           pow(b.rhs, Expr::constant(2.0)));
              case BinaryOp::pow:
                if (!b.rhs.depends_on(var)) {
                  // c * u^(c-1) * u'
                  const Expr lowered = sub(b.rhs, Expr::constant(1.0));
                  return mul(mul(b.rhs, pow(b.lhs, lowered)), dl);
                }
                // u^v * (v' log u + v u' / u)
                return mul(Expr::binary(BinaryOp::pow, b.lhs, b.rhs),
                           add(mul(dr, fn(UnaryOp::log, b.lhs)),
                               div(mul(b.rhs, dl), b.lhs)));
            }
            return Expr::constant(0.0);
          },
      },
      e.node().v);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength; larger binds tighter.
int precedence(const Expr& e) {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.value < 0.0 ? 3 : 5; },
          [](const Variable&) { return 5; },
          [](const Unary& u) { return u.op == UnaryOp::neg ? 3 : 5; },
          [](const Binary& b) {
            switch (b.op) {
              case BinaryOp::add:
              case BinaryOp::sub: return 1;
              case BinaryOp::mul:
              case BinaryOp::div: return 2;
              case BinaryOp::pow: return 4;
            }
            return 0;
          },
      },
      e.node().v);
}

std::string number_text(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::string wrap(const Expr& e, bool parens) {
  std::string s = to_string(e);
  return parens ? "(" + s + ")" : s;
}

}  // namespace

std::string to_string(const Expr& e) {
  return std::visit(
      Overloaded{
          [](const Constant& c) {
            return c.value < 0.0 ? "(" + number_text(c.value) + ")" : number_text(c.value);
          },
          [](const Variable& v) { return v.id.name(); },
          [](const Unary& u) {
            switch (u.op) {
              case UnaryOp::neg: return "-" + wrap(u.child, precedence(u.child) < 3);
              case UnaryOp::sin: return "sin(" + to_string(u.child) + ")";
              case UnaryOp::cos: return "cos(" + to_string(u.child) + ")";
              case UnaryOp::exp: return "exp(" + to_string(u.child) + ")";
              case UnaryOp::log: return "log(" + to_string(u.child) + ")";
              case UnaryOp::sqrt: return "sqrt(" + to_string(u.child) + ")";
            }
            return std::string();
          },
          [](const Binary& b) {
            if (b.op == BinaryOp::pow) {
              return wrap(b.lhs, precedence(b.lhs) < 5) + "^" +
                     wrap(b.rhs, precedence(b.rhs) < 4);
            }
            const int p = b.op == BinaryOp::add || b.op == BinaryOp::sub ? 1 : 2;
            const char* sym = b.op == BinaryOp::add   ? "+"
                              : b.op == BinaryOp::sub ? "-"
                              : b.op == BinaryOp::mul ? "*"
                                                      : "/";
            return wrap(b.lhs, precedence(b.lhs) < p) + sym +
                   wrap(b.rhs, precedence(b.rhs) <= p);
          },
      },
      e.node().v);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  const auto& va = a.node().v;
  const auto& vb = b.node().v;
  if (va.index() != vb.index()) return false;
  if (const auto* ca = std::get_if<Constant>(&va)) {
    return ca->value == std::get<Constant>(vb).value;
  }
  if (const auto* xa = std::get_if<Variable>(&va)) {
    return xa->id == std::get<Variable>(vb).id;
  }
  if (const auto* ua = std::get_if<Unary>(&va)) {
    const auto& ub = std::get<Unary>(vb);
    return ua->op == ub.op && structurally_equal(ua->child, ub.child);
  }
  const auto& ba = std::get<Binary>(va);
  const auto& bb = std::get<Binary>(vb);
  return ba.op == bb.op && structurally_equal(ba.lhs, bb.lhs) &&
         structurally_equal(ba.rhs, bb.rhs);
}

}  // namespace fracvar
