#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ontoforge/error.hpp"
#include "ontoforge/rdf.hpp"

namespace ontoforge {

class ConflictingDeclaration : public Error {
 public:
  explicit ConflictingDeclaration(std::vector<std::string> offenders);
  const std::vector<std::string>& offenders() const { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};

class UnknownClass : public Error {
 public:
  explicit UnknownClass(const std::string& iri) : Error("unknown class <" + iri + ">") {}
};

enum class EntityKind { Class, ObjectProperty, DataProperty, Individual, Unknown };

const char* to_string(EntityKind kind);

struct Annotation {
  std::optional<std::string> label;
  std::optional<std::string> comment;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

using IriSet = std::set<std::string>;
using IriEdge = std::pair<std::string, std::string>;

/// TBox/ABox view of a graph. All members are plain values so a snapshot can
/// be copied and shared freely.
struct OntologySnapshot {
  IriSet classes;
  IriSet object_properties;
  IriSet data_properties;
  IriSet individuals;
  std::set<IriEdge> subclass_edges;     // (child, parent)
  std::set<IriEdge> subproperty_edges;  // (child, parent)
  std::map<std::string, IriSet> domain_of;
  std::map<std::string, IriSet> range_of;
  std::set<IriEdge> type_assertions;  // (individual, class)
  std::map<std::string, Annotation> annotations;
  std::size_t axiom_total = 0;

  bool is_property(const std::string& iri) const {
    return object_properties.count(iri) != 0 || data_properties.count(iri) != 0;
  }

  friend bool operator==(const OntologySnapshot&, const OntologySnapshot&) = default;
};

/// Builds the snapshot. Throws ConflictingDeclaration when an IRI is declared
/// as more than one of owl:Class, owl:ObjectProperty, owl:DatatypeProperty.
OntologySnapshot extract_snapshot(const Graph& graph);

EntityKind classify(const OntologySnapshot& snapshot, const std::string& iri);

/// Reflexive-transitive superclasses of `cls`. Terminates on cycles.
IriSet subclass_closure(const OntologySnapshot& snapshot, const std::string& cls);

/// Direct subclasses of `cls`.
IriSet direct_subclasses(const OntologySnapshot& snapshot, const std::string& cls);

}  // namespace ontoforge
