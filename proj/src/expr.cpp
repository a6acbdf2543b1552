#include "cfree/expr.hpp"

#include <cctype>
#include <charconv>
#include <map>

#include <fmt/format.h>

#include "cfree/families.hpp"
#include "cfree/stable.hpp"

namespace cfree {

ParseError::ParseError(const std::string& message, int line, int column)
    : Error(fmt::format("{}:{}: {}", line, column, message)), detail_(message), line_(line), column_(column) {}

namespace {

using Type = Expr::Type;

// Argument pattern of each identifier. `min`/`max` bound the count; `types`
// gives the type of each position, the last entry repeating.
struct Signature {
  Type result;
  std::size_t min;
  std::size_t max;
  std::vector<Type> types;
};

const std::map<std::string, Signature, std::less<>>& signatures() {
  static const std::map<std::string, Signature, std::less<>> table = {
      {"delta", {Type::Measure, 1, 1, {Type::Number}}},
      {"bernoulli", {Type::Measure, 1, 1, {Type::Number}}},
      {"semicircle", {Type::Measure, 2, 2, {Type::Number}}},
      {"arcsine", {Type::Measure, 2, 2, {Type::Number}}},
      {"gaussian", {Type::Measure, 2, 2, {Type::Number}}},
      {"freepoisson", {Type::Measure, 1, 2, {Type::Number}}},
      {"cconv", {Type::Measure, 2, 1000000, {Type::Measure}}},
      {"bconv", {Type::Measure, 2, 1000000, {Type::Measure}}},
      {"fconv", {Type::Measure, 2, 1000000, {Type::Measure}}},
      {"cfconv", {Type::Pair, 2, 1000000, {Type::Pair}}},
      {"pair", {Type::Pair, 2, 2, {Type::Measure}}},
      // affine(x, a, b): law of a·X + b; x may be a measure or a pair.
      {"affine", {Type::Measure, 3, 3, {Type::Measure, Type::Number}}},
  };
  return table;
}

const char* type_name(Type t) {
  switch (t) {
    case Type::Number:
      return "a number";
    case Type::Measure:
      return "a measure";
    case Type::Pair:
      return "a pair";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    skip_space();
    Expr e = parse_call();
    skip_space();
    if (pos_ < text_.size()) fail(fmt::format("unexpected '{}' after expression", text_[pos_]));
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, column_); }
  [[noreturn]] void fail_at(const std::string& message, int line, int column) const {
    throw ParseError(message, line, column);
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  std::string describe_here() const {
    return at_end() ? "end of input" : fmt::format("'{}'", text_[pos_]);
  }

  void expect(char c) {
    skip_space();
    if (at_end() || peek() != c) fail(fmt::format("expected '{}' but found {}", c, describe_here()));
    advance();
  }

  bool starts_number() const {
    if (at_end()) return false;
    const char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+';
  }

  Expr parse_number() {
    Expr e;
    e.kind = Expr::Kind::Number;
    e.line = line_;
    e.column = column_;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    const char* p = begin;
    if (*p == '+') ++p;  // from_chars rejects a leading '+'
    const auto [ptr, ec] = std::from_chars(p, end, e.number);
    if (ec != std::errc() || ptr == p) fail("malformed number");
    while (text_.data() + pos_ < ptr) advance();
    return e;
  }

  Expr parse_call() {
    skip_space();
    Expr e;
    e.kind = Expr::Kind::Call;
    e.line = line_;
    e.column = column_;
    if (at_end() || !(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_'))
      fail(fmt::format("expected an identifier but found {}", describe_here()));
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      e.name.push_back(peek());
      advance();
    }
    const auto& table = signatures();
    const auto sig = table.find(e.name);
    if (sig == table.end()) fail_at(fmt::format("unknown identifier '{}'", e.name), e.line, e.column);
    expect('(');
    skip_space();
    if (!at_end() && peek() == ')') {
      advance();
    } else {
      while (true) {
        skip_space();
        e.args.push_back(starts_number() ? parse_number() : parse_call());
        skip_space();
        if (at_end()) fail("expected ',' or ')' but found end of input");
        if (peek() == ',') {
          advance();
          continue;
        }
        if (peek() == ')') {
          advance();
          break;
        }
        fail(fmt::format("expected ',' or ')' but found {}", describe_here()));
      }
    }
    check(e, sig->second);
    return e;
  }

  void check(const Expr& e, const Signature& sig) const {
    const std::size_t n = e.args.size();
    if (n < sig.min || n > sig.max) {
      const std::string want = sig.min == sig.max ? fmt::format("{}", sig.min)
                               : sig.max > 1000 ? fmt::format("at least {}", sig.min)
                                                : fmt::format("{} to {}", sig.min, sig.max);
      fail_at(fmt::format("'{}' takes {} argument{}, got {}", e.name, want, want == "1" ? "" : "s", n),
              e.line, e.column);
    }
    for (std::size_t i = 0; i < n; ++i) {
      Type want = i < sig.types.size() ? sig.types[i] : sig.types.back();
      const Type got = e.args[i].type();
      if (e.name == "affine" && i == 0 && got == Type::Pair) want = Type::Pair;
      if (got != want)
        fail_at(fmt::format("argument {} of '{}' must be {}, not {}", i + 1, e.name, type_name(want),
                            type_name(got)),
                e.args[i].line, e.args[i].column);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

template <class F>
auto with_context(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const NumericError& e) {
    throw NumericError(fmt::format("in {}: {}", path, e.what()));
  } catch (const PreconditionError& e) {
    throw PreconditionError(fmt::format("in {}: {}", path, e.what()));
  }
}

EvalResult eval_node(const Expr& e, const EvalSettings& s, const std::string& parent) {
  const std::string path =
      parent.empty() ? fmt::format("{}@{}:{}", e.name, e.line, e.column)
                     : fmt::format("{} > {}@{}:{}", parent, e.name, e.line, e.column);
  std::vector<EvalResult> kids;
  std::vector<double> nums;
  for (const auto& a : e.args) {
    if (a.kind == Expr::Kind::Number)
      nums.push_back(a.number);
    else
      kids.push_back(eval_node(a, s, path));
  }
  return with_context(path, [&]() -> EvalResult {
    auto measures = [&]() {
      std::vector<Measure> ms;
      for (auto& k : kids) ms.push_back(std::get<Measure>(k));
      return ms;
    };
    if (e.name == "cconv") {
      auto ms = measures();
      Measure acc = ms[0];
      for (std::size_t i = 1; i < ms.size(); ++i) acc = classical_conv(acc, ms[i], s.conv);
      return acc;
    }
    if (e.name == "bconv") return boolean_conv_many(measures(), 0.0, s.conv);
    if (e.name == "fconv") return free_conv_many(measures(), 0.0, s.conv);
    if (e.name == "cfconv") {
      std::vector<CFreePair> ps;
      for (auto& k : kids) ps.push_back(std::get<CFreePair>(k));
      return cfree_conv_many(ps, 0.0, 0.0, s.conv);
    }
    if (e.name == "pair") return make_pair(std::get<Measure>(kids[0]), std::get<Measure>(kids[1]));
    if (e.name == "affine") {
      const double a = nums[0], b = nums[1];
      require(a > 0.0, "affine scale must be positive");
      const AffineMap map{1.0 / a, -b / a};  // law of a·X + b
      if (const auto* m = std::get_if<Measure>(&kids[0])) return push_affine(*m, map);
      return push_pair(std::get<CFreePair>(kids[0]), map);
    }
    GridSettings grid;
    grid.grid_n = s.grid_n;
    grid.window = s.window;
    return make_family(e.name, nums, grid);
  });
}

void print_into(const Expr& e, std::string& out) {
  if (e.kind == Expr::Kind::Number) {
    out += fmt::format("{}", e.number);
    return;
  }
  out += e.name;
  out += '(';
  for (std::size_t i = 0; i < e.args.size(); ++i) {
    if (i > 0) out += ", ";
    print_into(e.args[i], out);
  }
  out += ')';
}

}  // namespace

Expr::Type Expr::type() const {
  if (kind == Kind::Number) return Type::Number;
  if (name == "affine" && !args.empty() && args[0].type() == Type::Pair) return Type::Pair;
  return signatures().at(name).result;
}

Expr parse_expr(std::string_view input) { return Parser(input).parse(); }

std::string print_expr(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

EvalResult evaluate(const Expr& e, const EvalSettings& s) {
  require(e.kind == Expr::Kind::Call, "top-level expression must be a call");
  return eval_node(e, s, "");
}

}  // namespace cfree
