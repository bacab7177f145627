#pragma once

#include <map>
#include <string>

#include "extvp/planner.hpp"
#include "extvp/storage.hpp"

namespace extvp {

// Table identifiers: TT, VP_<enc>, SS_<enc1>__<enc2>, OS_..., SO_... where enc
// percent-encodes non-alphanumerics of the IRI local name. Local names shared
// by several predicates get an _h<fnv1a of the full IRI> suffix.
class SqlNamer {
 public:
  SqlNamer(const Catalog& cat, const Dictionary& dict);

  std::string table(const TableKey& key) const;
  std::string predicate(TermId p) const;

 private:
  const Dictionary& dict_;
  std::map<TermId, std::string> names_;
};

std::string local_name(std::string_view iri);
std::string percent_encode(std::string_view s);

std::string emit_sql(const PlanNode& plan, const Catalog& cat, const Dictionary& dict);

}  // namespace extvp
