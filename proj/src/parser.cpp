#include "parser.hpp"

#include <cctype>
#include <cstdlib>
#include <optional>

namespace stldec {

namespace {

enum class Tok { Ident, Number, LBracket, RBracket, Comma, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      bump();
    int line = line_, col = col_;
    if (pos_ >= src_.size()) {
      cur_ = {Tok::End, "", line, col};
      return;
    }
    char c = src_[pos_];
    if (c == '[') { bump(); cur_ = {Tok::LBracket, "[", line, col}; return; }
    if (c == ']') { bump(); cur_ = {Tok::RBracket, "]", line, col}; return; }
    if (c == ',') { bump(); cur_ = {Tok::Comma, ",", line, col}; return; }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.' ||
        c == '+') {
      size_t start = pos_;
      bump();
      while (pos_ < src_.size()) {
        char d = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == 'e' ||
            d == 'E') {
          bump();
        } else if ((d == '-' || d == '+') &&
                   (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')) {
          bump();
        } else {
          break;
        }
      }
      cur_ = {Tok::Number, std::string(src_.substr(start, pos_ - start)), line, col};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        bump();
      cur_ = {Tok::Ident, std::string(src_.substr(start, pos_ - start)), line, col};
      return;
    }
    throw InputError(pos(line, col) + "unexpected character '" + std::string(1, c) + "'");
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  static std::string pos(int line, int col) {
    return std::to_string(line) + ":" + std::to_string(col) + ": ";
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_{Tok::End, "", 1, 1};
};

std::string at(const Token& t) {
  return std::to_string(t.line) + ":" + std::to_string(t.col) + ": ";
}

class Parser {
 public:
  Parser(std::string_view text, const std::set<std::string>* known)
      : lex_(text), known_(known) {}

  StlFormula::Ptr parse() {
    std::vector<StlFormula::Ptr> terms;
    terms.push_back(term());
    while (lex_.peek().kind == Tok::Ident && lex_.peek().text == "and") {
      lex_.take();
      terms.push_back(term());
    }
    const Token& end = lex_.peek();
    if (end.kind != Tok::End)
      throw InputError(at(end) + "expected 'and' or end of formula, got '" +
                       end.text + "'");
    if (terms.size() == 1) return terms[0];
    return StlFormula::make_conjunction(std::move(terms));
  }

 private:
  StlFormula::Ptr term() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Ident && (t.text == "G" || t.text == "F")) {
      Token op = lex_.take();
      TimeInterval iv = interval(op);
      StlFormula::Ptr a = atom();
      return op.text == "G" ? StlFormula::make_always(iv, std::move(a))
                            : StlFormula::make_eventually(iv, std::move(a));
    }
    StlFormula::Ptr left = atom();
    const Token& u = lex_.peek();
    if (u.kind == Tok::Ident && u.text == "U") {
      Token op = lex_.take();
      TimeInterval iv = interval(op);
      StlFormula::Ptr right = atom();
      return StlFormula::make_until(iv, std::move(left), std::move(right));
    }
    throw InputError(at(u) + "bare predicate is not a formula; expected 'U'");
  }

  TimeInterval interval(const Token& op) {
    expect(Tok::LBracket, "'[' after temporal operator");
    Token lo = expect(Tok::Number, "interval lower bound");
    expect(Tok::Comma, "','");
    Token hi = expect(Tok::Number, "interval upper bound");
    expect(Tok::RBracket, "']'");
    double a = to_number(lo);
    double b = to_number(hi);
    if (a < 0.0 || b < 0.0)
      throw InputError(at(op) + "interval bounds must be nonnegative");
    if (a > b)
      throw InputError(at(op) + "interval lower bound " + lo.text +
                       " exceeds upper bound " + hi.text);
    return TimeInterval(a, b);
  }

  StlFormula::Ptr atom() {
    Token t = expect(Tok::Ident, "predicate name");
    bool negated = false;
    if (t.text == "not") {
      negated = true;
      t = expect(Tok::Ident, "predicate name after 'not'");
    }
    if (t.text == "true") {
      if (negated) throw InputError(at(t) + "'not true' is not an atom");
      return StlFormula::make_true();
    }
    if (t.text == "and" || t.text == "not" || t.text == "G" || t.text == "F" ||
        t.text == "U")
      throw InputError(at(t) + "'" + t.text + "' is reserved and cannot name a predicate");
    if (known_ && !known_->count(t.text))
      throw InputError(at(t) + "unknown predicate name '" + t.text + "'");
    return StlFormula::make_predicate(t.text, negated);
  }

  Token expect(Tok kind, const std::string& what) {
    const Token& t = lex_.peek();
    if (t.kind != kind)
      throw InputError(at(t) + "expected " + what + ", got '" +
                       (t.kind == Tok::End ? "end of input" : t.text) + "'");
    return lex_.take();
  }

  double to_number(const Token& t) {
    char* end = nullptr;
    double v = std::strtod(t.text.c_str(), &end);
    if (!end || *end != '\0')
      throw InputError(at(t) + "malformed number '" + t.text + "'");
    return v;
  }

  Lexer lex_;
  const std::set<std::string>* known_;
};

}  // namespace

StlFormula::Ptr parse_formula(std::string_view text) {
  return Parser(text, nullptr).parse();
}

StlFormula::Ptr parse_formula(std::string_view text,
                              const std::set<std::string>& known) {
  return Parser(text, &known).parse();
}

}  // namespace stldec
