#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "wstl/formula.hpp"

namespace wstl {

/// Byte range [start, end) into parsed text.
struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceSpan span, const std::string& message)
      : std::runtime_error(message), span_(span) {}

  SourceSpan span() const { return span_; }

 private:
  SourceSpan span_;
};

struct ParseOptions {
  /// Accept literal zero weights. Set when reading pruned models.
  bool allow_zero_weights = false;
  /// Structure templates: `PRED` stands for a fresh predicate and weight
  /// braces may be omitted (all weights 1). Requires a known dimension.
  bool template_mode = false;
};

/// Parses the text grammar
///
///   formula  := "TRUE" | pred | "!" formula | binop | temporal
///   binop    := "(" formula ")" ("&" | "|") "{" num "," num "}" "(" formula ")"
///   temporal := ("G" | "F") "[" int "," int "]" "{" num ("," num)* "}" "(" formula ")"
///   pred     := "(" affine "<=" num ")"
///   affine   := term (("+" | "-") term)*
///   term     := num "*" "x" int
///
/// Feature indices are 1-based. `#` starts a comment running to end of line.
/// With `dimension == 0` the dimension is inferred as the largest feature
/// index used; otherwise indices above `dimension` are rejected.
Formula parse(std::string_view text, std::size_t dimension, const ParseOptions& options = {});

/// Canonical, fully parenthesized text form. Scalars are rounded to 7
/// significant digits and printed with 6 when the 7th is zero; printing a
/// parsed canonical text reproduces it byte for byte.
std::string print(const Formula& phi);

std::string format_scalar(double value);

/// Model file text: a comment header followed by print(phi). Pruned formulas
/// carry a `# wstl: sparsified` marker so their zero weights reload.
std::string to_file_text(const Formula& phi);
Formula parse_file_text(std::string_view text, std::size_t dimension = 0);

void save_formula_file(const std::filesystem::path& path, const Formula& phi);
Formula load_formula_file(const std::filesystem::path& path, std::size_t dimension = 0);

/// Renders "line:col: message" plus a caret line for a ParseError.
std::string describe_parse_error(std::string_view text, const ParseError& error);

}  // namespace wstl
