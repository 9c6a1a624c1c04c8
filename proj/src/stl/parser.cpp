#include "stlmpc/stl/parser.hpp"

#include <cctype>
#include <cstdlib>

namespace stlmpc {

namespace {

enum class Tok { Ident, Number, LParen, RParen, LBracket, RBracket, Comma,
                 Plus, Minus, Star, Ge, Le, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
      ++i_;
    tok_.pos = i_;
    if (i_ >= s_.size()) {
      tok_.kind = Tok::End;
      tok_.text = "<end>";
      return;
    }
    char c = s_[i_];
    switch (c) {
      case '(': tok_ = {Tok::LParen, "(", 0.0, i_++}; return;
      case ')': tok_ = {Tok::RParen, ")", 0.0, i_++}; return;
      case '[': tok_ = {Tok::LBracket, "[", 0.0, i_++}; return;
      case ']': tok_ = {Tok::RBracket, "]", 0.0, i_++}; return;
      case ',': tok_ = {Tok::Comma, ",", 0.0, i_++}; return;
      case '+': tok_ = {Tok::Plus, "+", 0.0, i_++}; return;
      case '-': tok_ = {Tok::Minus, "-", 0.0, i_++}; return;
      case '*': tok_ = {Tok::Star, "*", 0.0, i_++}; return;
      case '>':
      case '<': {
        if (i_ + 1 >= s_.size() || s_[i_ + 1] != '=')
          throw ParseError(i_, std::string("expected '") + c + "='");
        tok_ = {c == '>' ? Tok::Ge : Tok::Le, std::string(1, c) + "=", 0.0, i_};
        i_ += 2;
        return;
      }
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = i_;
      const char* begin = s_.c_str() + start;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError(start, "malformed number");
      i_ = start + static_cast<std::size_t>(end - begin);
      tok_ = {Tok::Number, s_.substr(start, i_ - start), v, start};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i_;
      while (i_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[i_])) ||
              s_[i_] == '_'))
        ++i_;
      tok_ = {Tok::Ident, s_.substr(start, i_ - start), 0.0, start};
      return;
    }
    throw ParseError(i_, std::string("unexpected character '") + c + "'");
  }

  const std::string& s_;
  std::size_t i_ = 0;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& s) : lex_(s) {}

  FormulaPtr parse() {
    FormulaPtr f = formula();
    expect(Tok::End, "end of input");
    return f;
  }

 private:
  Token expect(Tok kind, const std::string& what) {
    if (lex_.peek().kind != kind)
      throw ParseError(lex_.peek().pos,
                       "expected " + what + ", found '" + lex_.peek().text + "'");
    return lex_.take();
  }

  double number() {
    bool neg = false;
    if (lex_.peek().kind == Tok::Minus) {
      lex_.take();
      neg = true;
    } else if (lex_.peek().kind == Tok::Plus) {
      lex_.take();
    }
    Token t = expect(Tok::Number, "number");
    return neg ? -t.number : t.number;
  }

  FormulaPtr formula() {
    FormulaPtr acc = term();
    while (lex_.peek().kind == Tok::Ident &&
           (lex_.peek().text == "and" || lex_.peek().text == "or")) {
      Token op = lex_.take();
      FormulaPtr rhs = term();
      acc = (op.text == "and") ? f_and(acc, rhs) : f_or(acc, rhs);
    }
    return acc;
  }

  FormulaPtr term() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Ident) {
      if (t.text == "not") {
        lex_.take();
        return f_not(term());
      }
      if (t.text == "true") {
        lex_.take();
        return f_true();
      }
      if (t.text == "G" || t.text == "F") {
        // temporal only when followed by '['; a bare G/F is a signal name
        Token head = lex_.take();
        if (lex_.peek().kind == Tok::LBracket) {
          lex_.take();
          std::size_t iv_pos = lex_.peek().pos;
          double a = number();
          expect(Tok::Comma, "','");
          double b = number();
          expect(Tok::RBracket, "']'");
          if (a < 0.0 || a > b)
            throw ParseError(iv_pos, "interval requires 0 <= a <= b");
          expect(Tok::LParen, "'('");
          FormulaPtr child = formula();
          expect(Tok::RParen, "')'");
          Interval iv(a, b);
          return head.text == "G" ? f_always(iv, child)
                                  : f_eventually(iv, child);
        }
        return atom_from(head);
      }
      return atom();
    }
    if (t.kind == Tok::LParen) {
      lex_.take();
      FormulaPtr f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind == Tok::Number || t.kind == Tok::Plus || t.kind == Tok::Minus)
      return atom();
    throw ParseError(t.pos, "expected formula, found '" + t.text + "'");
  }

  // linexpr parsing; 'first' is an already-consumed leading identifier
  // (used when a signal happens to be named G or F).
  FormulaPtr atom_from(const Token& first) {
    Predicate p;
    p.coeffs[first.text] += 1.0;
    linexpr_tail(p);
    return finish_atom(p);
  }

  FormulaPtr atom() {
    Predicate p;
    double sign = 1.0;
    if (lex_.peek().kind == Tok::Minus) {
      lex_.take();
      sign = -1.0;
    } else if (lex_.peek().kind == Tok::Plus) {
      lex_.take();
    }
    linexpr_part(p, sign);
    linexpr_tail(p);
    return finish_atom(p);
  }

  void linexpr_tail(Predicate& p) {
    while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
      double sign = lex_.take().kind == Tok::Plus ? 1.0 : -1.0;
      linexpr_part(p, sign);
    }
  }

  void linexpr_part(Predicate& p, double sign) {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Number) {
      Token num = lex_.take();
      if (lex_.peek().kind == Tok::Star) {
        lex_.take();
        Token id = expect(Tok::Ident, "identifier");
        p.coeffs[id.text] += sign * num.number;
      } else {
        p.offset += sign * num.number;
      }
      return;
    }
    if (t.kind == Tok::Ident) {
      Token id = lex_.take();
      p.coeffs[id.text] += sign * 1.0;
      return;
    }
    throw ParseError(t.pos, "expected linear expression term, found '" +
                                t.text + "'");
  }

  FormulaPtr finish_atom(Predicate p) {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Ge) {
      lex_.take();
      p.offset -= number();
    } else if (t.kind == Tok::Le) {
      lex_.take();
      double rhs = number();
      p = p.negated();
      p.offset += rhs;
    } else {
      throw ParseError(t.pos, "expected '>=' or '<=', found '" + t.text + "'");
    }
    // drop exact-zero coefficients so printing round-trips cleanly
    for (auto it = p.coeffs.begin(); it != p.coeffs.end();)
      it = (it->second == 0.0) ? p.coeffs.erase(it) : std::next(it);
    return f_pred(std::move(p));
  }

  Lexer lex_;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text) {
  return Parser(text).parse();
}

}  // namespace stlmpc
