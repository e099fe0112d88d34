#pragma once

// Text grammar for expressions:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*        division only by constants
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' integer)?
//   primary := number ['i'] | 'i' | variable | 'exp' '(' expr ')' | '(' expr ')'
//
// exp() accepts any affine argument. Complex literals are written (a+bi).

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>

#include "orbitquant/termalg.hpp"

namespace orbitquant {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error("parse error at position " + std::to_string(pos) + ": " + what),
        position_(pos) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < text_.size())
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
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
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+')) {
        e = e + parse_term();
      } else if (accept('-')) {
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = e * parse_unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Expr d = parse_unary();
        if (!d.is_constant() || d.is_zero())
          throw ParseError("division only by a nonzero constant", at);
        e = e * (1.0 / d.constant_term());
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t at = pos_;
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    const std::size_t digits = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == digits) throw ParseError("exponent must be a nonnegative integer", at);
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw ParseError("exponent must be a nonnegative integer", at);
    if (negative) throw ParseError("negative exponents are not supported", at);
    const int n = std::stoi(std::string(text_.substr(digits, pos_ - digits)));
    return pow(base, n);
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "exp") {
        expect('(');
        const std::size_t at = pos_;
        Expr arg = parse_expr();
        expect(')');
        return exponential(arg, at);
      }
      if (name == "i") return Expr(kI);
      if (auto v = var_from_name(name)) return Expr::var(*v);
      throw ParseError("unknown variable '" + std::string(name) + "'", start);
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr parse_number() {
    char* end = nullptr;
    const std::string buf(text_.substr(pos_));
    const double v = std::strtod(buf.c_str(), &end);
    const std::size_t len = static_cast<std::size_t>(end - buf.c_str());
    if (len == 0) throw ParseError("malformed number", pos_);
    pos_ += len;
    if (pos_ < text_.size() && text_[pos_] == 'i' &&
        !(pos_ + 1 < text_.size() &&
          (std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '_'))) {
      ++pos_;
      return Expr(cplx{0.0, v});
    }
    return Expr(cplx{v, 0.0});
  }

  static Expr exponential(const Expr& arg, std::size_t at) {
    if (!is_affine(arg)) throw ParseError("exp() argument must be affine", at);
    Monomial m;
    m.coeff = 1.0;
    for (const auto& t : arg.terms()) {
      if (t.total_degree() == 0) {
        m.coeff *= std::exp(t.coeff);
      } else {
        for (std::size_t j = 0; j < kNumVars; ++j)
          if (t.powers[j] == 1) m.freqs[j] += t.coeff;
      }
    }
    return Expr::from_terms({m});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::Parser(text).parse_all(); }

}  // namespace orbitquant
