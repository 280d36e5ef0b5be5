#include "coast/sexpr.hpp"

#include <cctype>

namespace coast {

ParseError::ParseError(const std::string& message, SourceLocation loc)
    : std::runtime_error(std::to_string(loc.line) + ":" +
                         std::to_string(loc.column) + ": " + message),
      loc_(loc) {}

ParseError::ParseError(const std::string& message)
    : std::runtime_error(message) {}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool SExpr::is_keyword(std::string_view keyword) const {
  return !is_list && to_lower(atom) == to_lower(keyword);
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_space();
    while (pos_ < text_.size()) {
      out.push_back(read());
      skip_space();
    }
    return out;
  }

 private:
  SExpr read() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", loc());
    SExpr e;
    e.loc = loc();
    char c = text_[pos_];
    if (c == ')') throw ParseError("unbalanced ')'", loc());
    if (c == '(') {
      advance();
      e.is_list = true;
      while (true) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("missing ')'", e.loc);
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    size_t start = pos_;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';') break;
      advance();
    }
    e.atom = std::string(text_.substr(start, pos_ - start));
    return e;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  SourceLocation loc() const { return {line_, col_}; }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<SExpr> read_sexprs(std::string_view text) { return Reader(text).read_all(); }

}  // namespace coast
