#include <algorithm>
#include <cctype>
#include <map>

#include "extvp/error.hpp"
#include "extvp/sparql.hpp"

namespace extvp {

namespace {

constexpr const char* kXsd = "http://www.w3.org/2001/XMLSchema#";
constexpr const char* kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

enum class Tok { End, Iri, PName, Var, String, Number, Word, Punct };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // IRI body, pname, var name, unquoted string content, word, punctuation
  std::size_t offset = 0;
  bool is_integer = false;
};

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
         (static_cast<unsigned char>(c) >= 0x80);
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip();
      Token t;
      t.offset = pos_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (c == '<' && looks_like_iri()) {
        const auto close = src_.find('>', pos_);
        t.kind = Tok::Iri;
        t.text = std::string(src_.substr(pos_ + 1, close - pos_ - 1));
        pos_ = close + 1;
      } else if (c == '?' || c == '$') {
        ++pos_;
        const auto start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          ++pos_;
        if (pos_ == start) throw QuerySyntaxError(t.offset, "empty variable name");
        t.kind = Tok::Var;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (c == '"' || c == '\'') {
        t.kind = Tok::String;
        t.text = string_body(c, t.offset);
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '+') && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        t.kind = Tok::Number;
        const auto start = pos_;
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        t.is_integer = true;
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
          t.is_integer = false;
          ++pos_;
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        if (t.text.front() == '+') t.text.erase(0, 1);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':') {
        const auto start = pos_;
        while (pos_ < src_.size() && (is_name_char(src_[pos_]) || src_[pos_] == ':')) ++pos_;
        // A trailing '.' terminates the triple rather than belonging to the name.
        while (pos_ > start + 1 && src_[pos_ - 1] == '.') --pos_;
        t.text = std::string(src_.substr(start, pos_ - start));
        t.kind = t.text.find(':') != std::string::npos ? Tok::PName : Tok::Word;
      } else {
        t.kind = Tok::Punct;
        static const char* two[] = {"!=", "<=", ">=", "&&", "||", "^^"};
        t.text = std::string(1, c);
        for (const char* op : two) {
          if (src_.substr(pos_, 2) == op) t.text = op;
        }
        pos_ += t.text.size();
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void skip() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  // '<' starts an IRI unless it is a comparison operator.
  bool looks_like_iri() const {
    const auto close = src_.find('>', pos_);
    if (close == std::string_view::npos) return false;
    for (auto i = pos_ + 1; i < close; ++i) {
      const char c = src_[i];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '"' || c == '{' || c == '}') return false;
    }
    return !(pos_ + 1 < src_.size() && src_[pos_ + 1] == '=');
  }

  std::string string_body(char quote, std::size_t start) {
    ++pos_;
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != quote) {
      if (src_[pos_] == '\n') throw QuerySyntaxError(start, "unterminated string literal");
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
        const char e = src_[++pos_];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: out += e;
        }
        ++pos_;
        continue;
      }
      out += src_[pos_++];
    }
    if (pos_ >= src_.size()) throw QuerySyntaxError(start, "unterminated string literal");
    ++pos_;
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

const std::set<std::string>& unsupported_words() {
  static const std::set<std::string> words{
      "COUNT",  "SUM",     "AVG",    "MIN",      "MAX",     "GROUP_CONCAT", "SAMPLE", "GROUP",  "HAVING",
      "BIND",   "VALUES",  "MINUS",  "SERVICE",  "GRAPH",   "FROM",         "NAMED",  "EXISTS", "CONSTRUCT",
      "ASK",    "DESCRIBE", "INSERT", "DELETE",  "LOAD",    "CLEAR",        "REGEX",  "STR",    "LANG",
      "DATATYPE", "ISIRI", "ISURI",  "ISBLANK",  "ISLITERAL", "SAMETERM",   "LANGMATCHES", "IN", "IF",
      "COALESCE", "CONCAT", "STRLEN", "CONTAINS", "BASE",   "AS"};
  return words;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

  Algebra query() {
    prologue();
    reject_unsupported();
    expect_word("SELECT");
    bool distinct = false;
    if (is_word("DISTINCT")) {
      advance();
      distinct = true;
    } else if (is_word("REDUCED")) {
      advance();
    }
    bool select_all = false;
    std::vector<std::string> vars;
    if (is_punct("*")) {
      advance();
      select_all = true;
    } else {
      while (peek().kind == Tok::Var) vars.push_back(advance().text);
      if (is_punct("(")) throw UnsupportedQueryError("SELECT expressions");
      if (vars.empty()) fail("expected '*' or variables after SELECT");
    }
    reject_unsupported();
    if (is_word("WHERE")) advance();
    Algebra pattern = group();

    std::vector<OrderKey> order;
    std::uint64_t offset = 0;
    std::optional<std::uint64_t> limit;
    while (peek().kind != Tok::End) {
      reject_unsupported();
      if (is_word("ORDER")) {
        advance();
        expect_word("BY");
        order = order_keys();
      } else if (is_word("LIMIT")) {
        advance();
        limit = integer();
      } else if (is_word("OFFSET")) {
        advance();
        offset = integer();
      } else {
        fail("unexpected '" + peek().text + "' after query pattern");
      }
    }

    if (select_all) {
      for (auto& v : in_scope_vars(pattern)) {
        if (!v.starts_with("_:")) vars.push_back(v);
      }
    }
    Algebra a = std::move(pattern);
    if (!order.empty()) a = Algebra::order_by(std::move(order), std::move(a));
    a = Algebra::project(std::move(vars), std::move(a));
    if (distinct) a = Algebra::distinct(std::move(a));
    if (offset != 0 || limit) a = Algebra::slice(offset, limit, std::move(a));
    return a;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& advance() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is_word(const char* w, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Word && upper(peek(ahead).text) == w;
  }
  bool is_punct(const char* p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Punct && peek(ahead).text == p;
  }
  [[noreturn]] void fail(const std::string& what) const { throw QuerySyntaxError(peek().offset, what); }
  void expect_word(const char* w) {
    if (!is_word(w)) fail(std::string("expected ") + w);
    advance();
  }
  void expect_punct(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    advance();
  }
  void reject_unsupported() const {
    if (peek().kind == Tok::Word && unsupported_words().contains(upper(peek().text)))
      throw UnsupportedQueryError(upper(peek().text));
  }

  std::uint64_t integer() {
    if (peek().kind != Tok::Number || !peek().is_integer || peek().text.front() == '-')
      fail("expected a non-negative integer");
    return std::stoull(advance().text);
  }

  void prologue() {
    while (true) {
      if (is_word("PREFIX")) {
        advance();
        if (peek().kind != Tok::PName || peek().text.back() != ':') fail("expected prefix name ending in ':'");
        std::string name = advance().text;
        name.pop_back();
        if (peek().kind != Tok::Iri) fail("expected IRI in PREFIX declaration");
        prefixes_[name] = advance().text;
      } else if (is_word("BASE")) {
        throw UnsupportedQueryError("BASE");
      } else {
        return;
      }
    }
  }

  std::string expand(const Token& t) const {
    const auto colon = t.text.find(':');
    const auto prefix = t.text.substr(0, colon);
    if (prefix == "_") throw QuerySyntaxError(t.offset, "unexpected blank node");
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) throw QuerySyntaxError(t.offset, "undeclared prefix '" + prefix + ":'");
    return it->second + t.text.substr(colon + 1);
  }

  Term literal_term(const Token& t) {
    std::string form = Term::plain_literal(t.text).lexical;
    if (is_punct("@")) {
      advance();
      if (peek().kind != Tok::Word) fail("expected language tag");
      form += "@" + advance().text;
    } else if (is_punct("^^")) {
      advance();
      form += "^^<" + iri_text() + ">";
    }
    return Term::literal(std::move(form));
  }

  std::string iri_text() {
    if (peek().kind == Tok::Iri) return advance().text;
    if (peek().kind == Tok::PName) return expand(advance());
    fail("expected IRI");
  }

  static Term number_term(const Token& t) {
    return Term::literal("\"" + t.text + "\"^^<" + kXsd + (t.is_integer ? "integer" : "decimal") + ">");
  }

  // Term or variable in a triple pattern or filter operand.
  PatternTerm term(bool allow_bool_words) {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Var: return Variable{advance().text};
      case Tok::Iri: return Term::iri(advance().text);
      case Tok::PName:
        if (t.text.starts_with("_:")) return Variable{"_:" + advance().text.substr(2)};
        return Term::iri(expand(advance()));
      case Tok::String: return literal_term(advance());
      case Tok::Number: return number_term(advance());
      case Tok::Word: {
        const auto w = upper(t.text);
        if (allow_bool_words && (w == "TRUE" || w == "FALSE")) {
          advance();
          return Term::literal("\"" + std::string(w == "TRUE" ? "true" : "false") + "\"^^<" + kXsd + "boolean>");
        }
        reject_unsupported();
        fail("unexpected '" + t.text + "'");
      }
      case Tok::Punct:
        if (t.text == "[" || t.text == "(") throw UnsupportedQueryError("blank node property lists and collections");
        fail("unexpected '" + t.text + "'");
      case Tok::End: fail("unexpected end of query");
    }
    fail("unexpected token");
  }

  PatternTerm verb() {
    if (peek().kind == Tok::Word && peek().text == "a") {
      advance();
      return Term::iri(kRdfType);
    }
    if (is_punct("^") || is_punct("!") || is_punct("(")) throw UnsupportedQueryError("property paths");
    if (peek().kind == Tok::String || peek().kind == Tok::Number) fail("predicate must be an IRI or variable");
    PatternTerm p = term(false);
    for (const char* path_op : {"/", "|", "*", "+", "^"}) {
      if (is_punct(path_op)) throw UnsupportedQueryError("property paths");
    }
    return p;
  }

  void triples_same_subject(Bgp& bgp) {
    PatternTerm s = term(false);
    while (true) {
      PatternTerm p = verb();
      while (true) {
        bgp.patterns.push_back({s, p, term(false)});
        if (!is_punct(",")) break;
        advance();
      }
      if (!is_punct(";")) break;
      advance();
      while (is_punct(";")) advance();
      if (is_punct(".") || is_punct("}")) break;
    }
  }

  bool starts_triple() const {
    const auto k = peek().kind;
    return k == Tok::Var || k == Tok::Iri || k == Tok::PName || k == Tok::String || k == Tok::Number ||
           is_punct("[") || is_punct("(");
  }

  Algebra group() {
    const auto open_offset = peek().offset;
    expect_punct("{");
    std::optional<Algebra> acc;
    std::optional<FilterExpr> filters;
    auto add = [&](Algebra part) {
      acc = acc ? Algebra::join(std::move(*acc), std::move(part)) : std::move(part);
    };
    while (!is_punct("}")) {
      reject_unsupported();
      if (peek().kind == Tok::End) fail("unterminated group pattern");
      if (is_punct(".")) {
        advance();
      } else if (is_word("SELECT")) {
        throw UnsupportedQueryError("subqueries");
      } else if (is_word("OPTIONAL")) {
        advance();
        Algebra opt = group();
        std::optional<FilterExpr> f;
        if (opt.kind == Algebra::Kind::Filter) {
          f = std::move(opt.filter);
          opt = Algebra(std::move(opt.children.at(0)));
        }
        if (!acc) acc = Algebra::make_bgp({});
        acc = Algebra::left_join(std::move(*acc), std::move(opt), std::move(f));
      } else if (is_word("FILTER")) {
        advance();
        FilterExpr f = constraint();
        filters = filters ? FilterExpr::make_and(std::move(*filters), std::move(f)) : std::move(f);
      } else if (is_punct("{")) {
        Algebra part = group();
        while (is_word("UNION")) {
          advance();
          part = Algebra::make_union(std::move(part), group());
        }
        add(std::move(part));
      } else if (starts_triple()) {
        // Adjacent triple blocks merge into one BGP, even across a FILTER.
        Bgp* target = nullptr;
        if (acc && acc->kind == Algebra::Kind::Bgp) target = &acc->bgp;
        Bgp fresh;
        triples_same_subject(target ? *target : fresh);
        while (is_punct(".") && !is_punct("}", 1) && starts_triple_at(1)) {
          advance();
          triples_same_subject(target ? *target : fresh);
        }
        if (!target) add(Algebra::make_bgp(std::move(fresh)));
      } else {
        fail("unexpected '" + peek().text + "' in group pattern");
      }
    }
    advance();
    if (!acc) throw QuerySyntaxError(open_offset, "empty group pattern");
    if (acc->kind == Algebra::Kind::Bgp && acc->bgp.patterns.empty())
      throw QuerySyntaxError(open_offset, "empty basic graph pattern");
    if (filters) return Algebra::make_filter(std::move(*filters), std::move(*acc));
    return std::move(*acc);
  }

  bool starts_triple_at(std::size_t ahead) const {
    const auto k = peek(ahead).kind;
    return k == Tok::Var || k == Tok::Iri || k == Tok::PName || k == Tok::String || k == Tok::Number;
  }

  FilterExpr constraint() {
    if (is_punct("(")) {
      advance();
      FilterExpr e = or_expr();
      expect_punct(")");
      return e;
    }
    if (is_word("BOUND")) return primary();
    reject_unsupported();
    if (peek().kind == Tok::Word || peek().kind == Tok::PName || peek().kind == Tok::Iri)
      throw UnsupportedQueryError("function calls in FILTER");
    fail("expected '(' after FILTER");
  }

  FilterExpr or_expr() {
    FilterExpr e = and_expr();
    while (is_punct("||")) {
      advance();
      e = FilterExpr::make_or(std::move(e), and_expr());
    }
    return e;
  }

  FilterExpr and_expr() {
    FilterExpr e = unary();
    while (is_punct("&&")) {
      advance();
      e = FilterExpr::make_and(std::move(e), unary());
    }
    return e;
  }

  FilterExpr unary() {
    if (is_punct("!")) {
      advance();
      return FilterExpr::make_not(unary());
    }
    return primary();
  }

  static std::optional<CompareOp> compare_op(const Token& t) {
    if (t.kind != Tok::Punct) return std::nullopt;
    if (t.text == "=") return CompareOp::Eq;
    if (t.text == "!=") return CompareOp::Ne;
    if (t.text == "<") return CompareOp::Lt;
    if (t.text == "<=") return CompareOp::Le;
    if (t.text == ">") return CompareOp::Gt;
    if (t.text == ">=") return CompareOp::Ge;
    return std::nullopt;
  }

  FilterExpr primary() {
    if (is_punct("(")) {
      advance();
      FilterExpr e = or_expr();
      expect_punct(")");
      return e;
    }
    if (is_word("BOUND")) {
      advance();
      expect_punct("(");
      if (peek().kind != Tok::Var) fail("BOUND expects a variable");
      FilterExpr e = FilterExpr::bound(advance().text);
      expect_punct(")");
      return e;
    }
    if ((is_word("TRUE") || is_word("FALSE")) && !compare_op(peek(1))) {
      const bool v = is_word("TRUE");
      advance();
      return FilterExpr::constant(v);
    }
    if ((peek().kind == Tok::Word || peek().kind == Tok::PName || peek().kind == Tok::Iri) && is_punct("(", 1))
      throw UnsupportedQueryError("function calls in FILTER");
    reject_unsupported();
    PatternTerm lhs = term(true);
    for (const char* arith : {"+", "-", "*", "/"}) {
      if (is_punct(arith)) throw UnsupportedQueryError("arithmetic in FILTER");
    }
    const auto op = compare_op(peek());
    if (!op) fail("expected comparison operator");
    advance();
    PatternTerm rhs = term(true);
    for (const char* arith : {"+", "-", "*", "/"}) {
      if (is_punct(arith)) throw UnsupportedQueryError("arithmetic in FILTER");
    }
    return FilterExpr::compare(*op, std::move(lhs), std::move(rhs));
  }

  std::vector<OrderKey> order_keys() {
    std::vector<OrderKey> keys;
    while (true) {
      if (peek().kind == Tok::Var) {
        keys.push_back({advance().text, false});
      } else if (is_word("ASC") || is_word("DESC")) {
        const bool desc = upper(advance().text) == "DESC";
        expect_punct("(");
        if (peek().kind != Tok::Var) throw UnsupportedQueryError("ORDER BY expressions");
        keys.push_back({advance().text, desc});
        expect_punct(")");
      } else if (is_punct("(")) {
        throw UnsupportedQueryError("ORDER BY expressions");
      } else {
        break;
      }
    }
    if (keys.empty()) fail("expected ORDER BY key");
    return keys;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, std::string> prefixes_;
};

}  // namespace

Algebra parse_query(std::string_view text) { return Parser(text).query(); }

}  // namespace extvp
