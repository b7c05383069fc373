#include "wstl/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wstl {

namespace {

constexpr std::string_view kSparsifiedMarker = "wstl: sparsified";

class Parser {
 public:
  Parser(std::string_view text, std::size_t dimension, const ParseOptions& options)
      : text_(text), dimension_(dimension), options_(options) {}

  Formula run() {
    if (options_.template_mode && dimension_ == 0) {
      throw ParseError({0, 0}, "template parsing needs a known signal dimension");
    }
    Formula phi = formula();
    skip();
    if (pos_ != text_.size()) error(pos_, pos_ + 1, "unexpected trailing input");
    if (dimension_ == 0) {
      if (max_feature_ == 0 && has_predicate_) error(0, 0, "cannot infer signal dimension");
      pad_predicates(phi, max_feature_);
    }
    return phi;
  }

 private:
  [[noreturn]] void error(std::size_t start, std::size_t end, const std::string& message) const {
    start = std::min(start, text_.size());
    end = std::clamp(end, start, text_.size());
    throw ParseError({start, end}, message);
  }

  void skip() {
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else if (ch == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  char peek() {
    skip();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char ch) {
    if (peek() != ch) {
      if (pos_ >= text_.size()) error(pos_, pos_, std::string("expected '") + ch + "', found end of input");
      error(pos_, pos_ + 1, std::string("expected '") + ch + "', found '" + text_[pos_] + "'");
    }
    ++pos_;
  }

  bool accept_keyword(std::string_view kw) {
    skip();
    if (text_.substr(pos_, kw.size()) == kw) {
      pos_ += kw.size();
      return true;
    }
    return false;
  }

  double number(SourceSpan* span_out = nullptr) {
    skip();
    const std::size_t start = pos_;
    std::size_t p = pos_;
    if (p < text_.size() && (text_[p] == '-' || text_[p] == '+')) ++p;
    const std::size_t digits_start = p;
    while (p < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[p])) || text_[p] == '.')) ++p;
    if (p == digits_start) error(start, start + 1, "expected a number");
    if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < text_.size() && (text_[q] == '-' || text_[q] == '+')) ++q;
      if (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) {
        while (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) ++q;
        p = q;
      }
    }
    // from_chars rejects a leading '+'
    std::size_t parse_from = text_[start] == '+' ? start + 1 : start;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + parse_from, text_.data() + p, value);
    if (ec != std::errc{} || ptr != text_.data() + p || !std::isfinite(value)) {
      error(start, p, "malformed number '" + std::string(text_.substr(start, p - start)) + "'");
    }
    pos_ = p;
    if (span_out) *span_out = {start, p};
    return value;
  }

  std::size_t integer(SourceSpan* span_out = nullptr) {
    skip();
    const std::size_t start = pos_;
    std::size_t p = pos_;
    while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
    if (p == start) error(start, start + 1, "expected a non-negative integer");
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + p, value);
    if (ec != std::errc{}) error(start, p, "integer out of range");
    pos_ = p;
    if (span_out) *span_out = {start, p};
    return value;
  }

  double weight() {
    SourceSpan span;
    double w = number(&span);
    if (w < 0.0 || (w == 0.0 && !options_.allow_zero_weights)) {
      error(span.start, span.end, "non-positive weight " + std::string(text_.substr(span.start, span.end - span.start)));
    }
    return w;
  }

  Formula formula() {
    char ch = peek();
    const std::size_t start = pos_;
    if (ch == '\0') error(pos_, pos_, "unexpected end of input, expected a formula");
    if (accept_keyword("TRUE")) return Formula::truth();
    if (options_.template_mode && accept_keyword("PRED")) {
      has_predicate_ = true;
      return Formula::predicate(std::vector<double>(dimension_, 0.0), 0.0);
    }
    if (ch == '!') {
      ++pos_;
      return Formula::negation(formula());
    }
    if (ch == 'G' || ch == 'F') {
      ++pos_;
      return temporal(ch == 'G', start);
    }
    if (ch == '(') {
      ++pos_;
      char next = peek();
      if (std::isdigit(static_cast<unsigned char>(next)) || next == '-' || next == '+' || next == '.') {
        return predicate(start);
      }
      return binop();
    }
    std::size_t end = start;
    while (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) ++end;
    if (end == start) end = start + 1;
    error(start, end, "unknown token '" + std::string(text_.substr(start, end - start)) + "'");
  }

  Formula temporal(bool always, std::size_t start) {
    expect('[');
    SourceSpan k1_span, k2_span;
    std::size_t k1 = integer(&k1_span);
    expect(',');
    std::size_t k2 = integer(&k2_span);
    expect(']');
    if (k1 > k2) error(k1_span.start, k2_span.end, "interval k1 > k2");
    const std::size_t length = k2 - k1 + 1;

    std::vector<double> weights;
    if (peek() == '{') {
      const std::size_t brace = pos_;
      ++pos_;
      weights.push_back(weight());
      while (peek() == ',') {
        ++pos_;
        weights.push_back(weight());
      }
      expect('}');
      if (weights.size() != length) {
        error(brace, pos_,
              "weight length " + std::to_string(weights.size()) + " != interval length " +
                  std::to_string(length));
      }
    } else if (options_.template_mode) {
      weights.assign(length, 1.0);
    } else {
      error(pos_, pos_ + 1, "expected '{' with " + std::to_string(length) + " weights");
    }

    expect('(');
    Formula child = formula();
    expect(')');
    (void)start;
    Interval I{k1, k2};
    return always ? Formula::always(I, std::move(weights), std::move(child))
                  : Formula::eventually(I, std::move(weights), std::move(child));
  }

  Formula binop() {
    // opening '(' already consumed
    Formula lhs = formula();
    expect(')');
    char op = peek();
    if (op != '&' && op != '|') {
      error(pos_, pos_ + 1, "expected '&' or '|' after parenthesized formula");
    }
    ++pos_;
    double w1 = 1.0, w2 = 1.0;
    if (peek() == '{') {
      const std::size_t brace = pos_;
      ++pos_;
      w1 = weight();
      if (peek() != ',') error(brace, pos_ + 1, "binary operator needs exactly 2 weights");
      ++pos_;
      w2 = weight();
      if (peek() != '}') error(brace, pos_ + 1, "binary operator needs exactly 2 weights");
      ++pos_;
    } else if (!options_.template_mode) {
      error(pos_, pos_ + 1, "expected '{' with 2 weights");
    }
    expect('(');
    Formula rhs = formula();
    expect(')');
    return op == '&' ? Formula::conjunction(w1, std::move(lhs), w2, std::move(rhs))
                     : Formula::disjunction(w1, std::move(lhs), w2, std::move(rhs));
  }

  Formula predicate(std::size_t start) {
    // opening '(' already consumed
    has_predicate_ = true;
    std::vector<std::pair<std::size_t, double>> terms;
    double sign = 1.0;
    while (true) {
      const std::size_t term_start = peek() == '\0' ? pos_ : pos_;
      double coef = sign * number();
      expect('*');
      if (peek() != 'x') error(pos_, pos_ + 1, "expected feature variable x<index>");
      ++pos_;
      SourceSpan idx_span;
      // no whitespace between 'x' and its index
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        error(pos_, pos_ + 1, "expected feature index after 'x'");
      }
      std::size_t j = integer(&idx_span);
      if (j == 0) error(term_start, idx_span.end, "feature indices start at x1");
      if (dimension_ != 0 && j > dimension_) {
        error(term_start, idx_span.end,
              "feature index x" + std::to_string(j) + " exceeds signal dimension " + std::to_string(dimension_));
      }
      for (const auto& t : terms) {
        if (t.first == j) error(term_start, idx_span.end, "feature x" + std::to_string(j) + " appears twice");
      }
      terms.emplace_back(j, coef);
      max_feature_ = std::max(max_feature_, j);

      char ch = peek();
      if (ch == '+' || ch == '-') {
        sign = ch == '-' ? -1.0 : 1.0;
        ++pos_;
        continue;
      }
      break;
    }
    skip();
    if (text_.substr(pos_, 2) != "<=") error(pos_, pos_ + 1, "expected '<=' in predicate");
    pos_ += 2;
    double c = number();
    expect(')');
    (void)start;

    std::size_t l = dimension_ != 0 ? dimension_ : max_feature_;
    std::vector<double> a(l, 0.0);
    for (const auto& [j, coef] : terms) {
      if (j > a.size()) a.resize(j, 0.0);
      a[j - 1] = coef;
    }
    return Formula::predicate(std::move(a), c);
  }

  static void pad_predicates(Formula& phi, std::size_t l) {
    if (phi.op() == Op::Predicate && phi.predicate().a.size() < l) phi.predicate().a.resize(l, 0.0);
    for (auto& c : phi.children()) pad_predicates(c, l);
  }

  std::string_view text_;
  std::size_t dimension_;
  ParseOptions options_;
  std::size_t pos_ = 0;
  std::size_t max_feature_ = 0;
  bool has_predicate_ = false;
};

std::string format_with(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.*g", digits, value);
  return buf;
}

void print_node(const Formula& phi, std::string& out) {
  switch (phi.op()) {
    case Op::True: out += "TRUE"; return;
    case Op::Predicate: {
      const auto& p = phi.predicate();
      out += '(';
      for (std::size_t j = 0; j < p.a.size(); ++j) {
        const double v = p.a[j];
        if (j == 0) {
          out += format_scalar(v);
        } else {
          out += std::signbit(v) ? " - " : " + ";
          out += format_scalar(std::fabs(v));
        }
        out += "*x" + std::to_string(j + 1);
      }
      out += " <= " + format_scalar(p.c) + ")";
      return;
    }
    case Op::Not:
      out += '!';
      print_node(phi.child(0), out);
      return;
    case Op::And:
    case Op::Or:
      out += '(';
      print_node(phi.child(0), out);
      out += phi.op() == Op::And ? ") &{" : ") |{";
      out += format_scalar(phi.weights()[0]) + "," + format_scalar(phi.weights()[1]) + "} (";
      print_node(phi.child(1), out);
      out += ')';
      return;
    case Op::Always:
    case Op::Eventually: {
      out += phi.op() == Op::Always ? 'G' : 'F';
      out += "[" + std::to_string(phi.interval().k1) + "," + std::to_string(phi.interval().k2) + "]{";
      const auto w = phi.weights();
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ',';
        out += format_scalar(w[i]);
      }
      out += "}(";
      print_node(phi.child(0), out);
      out += ')';
      return;
    }
  }
}

}  // namespace

Formula parse(std::string_view text, std::size_t dimension, const ParseOptions& options) {
  return Parser(text, dimension, options).run();
}

std::string format_scalar(double value) {
  // Rounded to 7 significant digits, shown with 6 when the 7th is zero. The
  // choice depends only on the 7-digit decimal, so print(parse(print(x)))
  // reproduces print(x) exactly.
  const std::string seven = format_with(value, 7);
  const std::size_t e = seven.find_first_of("eE");
  const char last = seven[(e == std::string::npos ? seven.size() : e) - 1];
  return last == '0' ? format_with(value, 6) : seven;
}

std::string print(const Formula& phi) {
  std::string out;
  print_node(phi, out);
  return out;
}

std::string to_file_text(const Formula& phi) {
  std::string out = "# wstl formula\n";
  if (std::size_t l = dimension(phi); l != 0) out += "# dimension: " + std::to_string(l) + "\n";
  if (phi.sparsified()) out += "# " + std::string(kSparsifiedMarker) + "\n";
  out += print(phi);
  out += '\n';
  return out;
}

Formula parse_file_text(std::string_view text, std::size_t dimension) {
  bool sparsified = false;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] == '#') {
      std::string_view body = line.substr(first + 1);
      auto b = body.find_first_not_of(" \t");
      auto e = body.find_last_not_of(" \t\r");
      if (b != std::string_view::npos && body.substr(b, e - b + 1) == kSparsifiedMarker) sparsified = true;
    }
    begin = end + 1;
  }
  ParseOptions options;
  options.allow_zero_weights = sparsified;
  Formula phi = parse(text, dimension, options);
  phi.set_sparsified(sparsified);
  return phi;
}

void save_formula_file(const std::filesystem::path& path, const Formula& phi) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_file_text(phi);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Formula load_formula_file(const std::filesystem::path& path, std::size_t dimension) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open formula file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_file_text(ss.str(), dimension);
}

std::string describe_parse_error(std::string_view text, const ParseError& error) {
  const auto span = error.span();
  std::size_t line = 1, col = 1, line_start = 0;
  for (std::size_t i = 0; i < span.start && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
      line_start = i + 1;
    } else {
      ++col;
    }
  }
  std::size_t line_end = text.find('\n', line_start);
  if (line_end == std::string_view::npos) line_end = text.size();
  std::string out = std::to_string(line) + ":" + std::to_string(col) + ": " + error.what() + "\n";
  out += "  " + std::string(text.substr(line_start, line_end - line_start)) + "\n  ";
  out += std::string(span.start - line_start, ' ');
  std::size_t width = std::max<std::size_t>(1, std::min(span.end, line_end) - span.start);
  out += std::string(width, '^');
  return out;
}

}  // namespace wstl
