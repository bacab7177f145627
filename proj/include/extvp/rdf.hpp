#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace extvp {

using TermId = std::uint64_t;
inline constexpr TermId kInvalidId = std::numeric_limits<TermId>::max();

enum class TermKind : std::uint8_t { Iri, Literal, Blank };

// An RDF term. For IRIs `lexical` is the text between the angle brackets, for
// blank nodes it is the label without "_:", and for literals it is the full
// quoted form including any "^^<datatype>" or "@lang" suffix, verbatim.
struct Term {
  TermKind kind = TermKind::Iri;
  std::string lexical;

  static Term iri(std::string text) { return {TermKind::Iri, std::move(text)}; }
  static Term blank(std::string label) { return {TermKind::Blank, std::move(label)}; }
  // Wraps a plain value in quotes, escaping as N-Triples requires.
  static Term plain_literal(std::string_view value);
  static Term literal(std::string quoted_form) { return {TermKind::Literal, std::move(quoted_form)}; }

  std::string to_ntriples() const;
  // Lexical value used for comparisons: IRI text, blank label, or the
  // unescaped literal content without quotes and suffix.
  std::string value() const;

  friend bool operator==(const Term&, const Term&) = default;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept {
    return std::hash<std::string>{}(t.lexical) * 31u + static_cast<std::size_t>(t.kind);
  }
};

struct Triple {
  TermId s = 0;
  TermId p = 0;
  TermId o = 0;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Append-only bijection between terms and dense ids.
class Dictionary {
 public:
  TermId encode(const Term& t);
  const Term& decode(TermId id) const;
  std::optional<TermId> find(const Term& t) const;
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<Term>& terms() const noexcept { return terms_; }

 private:
  std::vector<Term> terms_;
  std::unordered_map<Term, TermId, TermHash> index_;
};

struct Graph {
  std::vector<Triple> triples;  // first-appearance order, duplicate-free
  Dictionary dict;
  std::vector<TermId> predicates;  // ascending

  std::size_t n() const noexcept { return triples.size(); }
  std::size_t k() const noexcept { return predicates.size(); }
};

Graph parse_ntriples(std::istream& in);
Graph parse_ntriples(std::string_view text);
void write_ntriples(const Graph& g, std::ostream& out);

// Parses one term in N-Triples syntax (used by the dictionary file reader and tests).
Term parse_term(std::string_view text);

}  // namespace extvp
