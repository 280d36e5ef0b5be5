#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coast {

struct SourceLocation {
  int line = 1;
  int column = 1;
};

/// Raised for malformed input in any of the PDDL-style dialects. The message
/// is prefixed with "line:column" when a location is known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, SourceLocation loc);
  explicit ParseError(const std::string& message);

  SourceLocation location() const { return loc_; }

 private:
  SourceLocation loc_{0, 0};
};

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  SourceLocation loc;

  bool is_atom() const { return !is_list; }
  /// Case-insensitive comparison against a keyword such as ":action".
  bool is_keyword(std::string_view keyword) const;
};

/// Reads every top-level s-expression in `text`. Comments start with ';'.
std::vector<SExpr> read_sexprs(std::string_view text);

std::string to_lower(std::string_view s);

}  // namespace coast
