#include <map>

#include "extvp/executor.hpp"

namespace extvp {

namespace {

using Mapping = std::map<std::string, TermId>;

bool bind(const PatternTerm& pt, TermId value, const Dictionary& dict, Mapping& m) {
  if (!is_var(pt)) {
    const auto id = dict.find(std::get<Term>(pt));
    return id && *id == value;
  }
  const auto [it, inserted] = m.emplace(var_name(pt), value);
  return inserted || it->second == value;
}

}  // namespace

MappingBag brute_force_bgp(const Bgp& bgp, const Graph& g) {
  std::vector<Mapping> solutions{Mapping{}};
  for (const auto& tp : bgp.patterns) {
    std::vector<Mapping> next;
    for (const auto& mu : solutions) {
      for (const auto& t : g.triples) {
        Mapping m = mu;
        if (bind(tp.s, t.s, g.dict, m) && bind(tp.p, t.p, g.dict, m) && bind(tp.o, t.o, g.dict, m))
          next.push_back(std::move(m));
      }
    }
    solutions = std::move(next);
  }
  if (bgp.patterns.empty()) return MappingBag::unit();
  MappingBag out(bgp.vars());
  std::vector<TermId> row;
  for (const auto& m : solutions) {
    row.clear();
    for (const auto& v : out.schema()) row.push_back(m.at(v));
    out.add_row(row);
  }
  return out;
}

}  // namespace extvp
