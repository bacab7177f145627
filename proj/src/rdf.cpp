#include "extvp/rdf.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "extvp/error.hpp"

namespace extvp {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno) : line_(line), lineno_(lineno) {}

  void skip_ws() {
    while (pos_ < line_.size() && is_space(line_[pos_])) ++pos_;
  }
  bool at_end() const { return pos_ >= line_.size(); }
  char peek() const { return at_end() ? '\0' : line_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const { throw NTriplesError(lineno_, what); }

  Term term() {
    skip_ws();
    if (at_end()) fail("unexpected end of statement");
    const char c = peek();
    if (c == '<') return iri();
    if (c == '_') return blank();
    if (c == '"') return literal();
    fail(std::string("unexpected character '") + c + "'");
  }

  Term iri() {
    const auto close = line_.find('>', pos_ + 1);
    if (close == std::string_view::npos) fail("bad IRI bracket: missing '>'");
    auto text = line_.substr(pos_ + 1, close - pos_ - 1);
    if (text.empty()) fail("empty IRI");
    for (char ch : text) {
      if (ch == '<' || ch == ' ' || ch == '"') fail("bad IRI bracket: illegal character in IRI");
    }
    pos_ = close + 1;
    return Term::iri(std::string(text));
  }

  Term blank() {
    if (line_.substr(pos_, 2) != "_:") fail("bad blank node");
    pos_ += 2;
    const auto start = pos_;
    while (pos_ < line_.size() && !is_space(line_[pos_]) && line_[pos_] != '<' && line_[pos_] != '"') ++pos_;
    // A label may not end with '.', so a trailing dot is the statement terminator.
    while (pos_ > start && line_[pos_ - 1] == '.') --pos_;
    if (pos_ == start) fail("empty blank node label");
    return Term::blank(std::string(line_.substr(start, pos_ - start)));
  }

  Term literal() {
    const auto start = pos_;
    ++pos_;
    bool closed = false;
    while (pos_ < line_.size()) {
      const char ch = line_[pos_];
      if (ch == '\\') {
        pos_ += 2;
        continue;
      }
      ++pos_;
      if (ch == '"') {
        closed = true;
        break;
      }
    }
    if (!closed || pos_ > line_.size()) fail("unterminated literal");
    if (line_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      if (peek() != '<') fail("datatype must be an IRI");
      iri();
    } else if (peek() == '@') {
      ++pos_;
      const auto tag_start = pos_;
      while (pos_ < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '-'))
        ++pos_;
      if (pos_ == tag_start) fail("empty language tag");
    }
    return Term::literal(std::string(line_.substr(start, pos_ - start)));
  }

  void terminator() {
    skip_ws();
    if (peek() != '.') fail("expected '.' at end of statement");
    ++pos_;
    skip_ws();
    if (!at_end() && peek() != '#') fail("trailing characters after '.'");
  }

 private:
  std::string_view line_;
  std::size_t lineno_;
  std::size_t pos_ = 0;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::size_t h = t.s;
    h = h * 0x9E3779B97F4A7C15ull + t.p;
    h = h * 0x9E3779B97F4A7C15ull + t.o;
    return h ^ (h >> 29);
  }
};

struct TripleEq {
  bool operator()(const Triple& a, const Triple& b) const noexcept {
    return a.s == b.s && a.p == b.p && a.o == b.o;
  }
};

}  // namespace

Term Term::plain_literal(std::string_view value) {
  std::string out = "\"";
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return literal(std::move(out));
}

std::string Term::to_ntriples() const {
  switch (kind) {
    case TermKind::Iri: return "<" + lexical + ">";
    case TermKind::Blank: return "_:" + lexical;
    case TermKind::Literal: return lexical;
  }
  return lexical;
}

std::string Term::value() const {
  if (kind != TermKind::Literal) return lexical;
  const auto close = lexical.rfind('"');
  std::string out;
  for (std::size_t i = 1; i < close; ++i) {
    const char c = lexical[i];
    if (c != '\\' || i + 1 >= close) {
      out += c;
      continue;
    }
    const char e = lexical[++i];
    switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case 'u':
      case 'U': {
        const std::size_t len = e == 'u' ? 4 : 8;
        if (i + len < close) {
          append_utf8(out, static_cast<std::uint32_t>(std::stoul(lexical.substr(i + 1, len), nullptr, 16)));
          i += len;
        }
        break;
      }
      default: out += e;
    }
  }
  return out;
}

TermId Dictionary::encode(const Term& t) {
  if (auto it = index_.find(t); it != index_.end()) return it->second;
  const auto id = static_cast<TermId>(terms_.size());
  terms_.push_back(t);
  index_.emplace(t, id);
  return id;
}

const Term& Dictionary::decode(TermId id) const {
  if (id >= terms_.size()) throw LookupError("unknown term id " + std::to_string(id));
  return terms_[id];
}

std::optional<TermId> Dictionary::find(const Term& t) const {
  if (auto it = index_.find(t); it != index_.end()) return it->second;
  return std::nullopt;
}

Graph parse_ntriples(std::istream& in) {
  Graph g;
  std::unordered_set<Triple, TripleHash, TripleEq> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    LineParser lp(line, lineno);
    lp.skip_ws();
    if (lp.at_end() || lp.peek() == '#') continue;
    const Term s = lp.term();
    if (s.kind == TermKind::Literal) lp.fail("subject must be an IRI or blank node");
    const Term p = lp.term();
    if (p.kind != TermKind::Iri) lp.fail("predicate must be an IRI");
    const Term o = lp.term();
    lp.terminator();
    const Triple t{g.dict.encode(s), g.dict.encode(p), g.dict.encode(o)};
    if (seen.insert(t).second) g.triples.push_back(t);
  }
  for (const auto& t : g.triples) g.predicates.push_back(t.p);
  std::sort(g.predicates.begin(), g.predicates.end());
  g.predicates.erase(std::unique(g.predicates.begin(), g.predicates.end()), g.predicates.end());
  return g;
}

Graph parse_ntriples(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_ntriples(in);
}

void write_ntriples(const Graph& g, std::ostream& out) {
  for (const auto& t : g.triples) {
    out << g.dict.decode(t.s).to_ntriples() << ' ' << g.dict.decode(t.p).to_ntriples() << ' '
        << g.dict.decode(t.o).to_ntriples() << " .\n";
  }
}

Term parse_term(std::string_view text) {
  LineParser lp(text, 1);
  Term t = lp.term();
  lp.skip_ws();
  if (!lp.at_end()) lp.fail("trailing characters after term");
  return t;
}

}  // namespace extvp
