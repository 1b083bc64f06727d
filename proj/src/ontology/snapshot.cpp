#include <algorithm>
#include <deque>

#include "ontoforge/ontology.hpp"
#include "ontoforge/vocab.hpp"

namespace ontoforge {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

bool is_schema_vocabulary(const std::string& iri) {
  return starts_with(iri, vocab::kOwl) || starts_with(iri, vocab::kRdfs) ||
         starts_with(iri, vocab::kRdf);
}

}  // namespace

ConflictingDeclaration::ConflictingDeclaration(std::vector<std::string> offenders)
    : Error("conflicting entity declarations for: " + join(offenders)),
      offenders_(std::move(offenders)) {}

const char* to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::Class: return "Class";
    case EntityKind::ObjectProperty: return "ObjectProperty";
    case EntityKind::DataProperty: return "DataProperty";
    case EntityKind::Individual: return "Individual";
    case EntityKind::Unknown: return "Unknown";
  }
  return "Unknown";
}

OntologySnapshot extract_snapshot(const Graph& graph) {
  const Term rdf_type = Term::iri(vocab::kRdfType);
  OntologySnapshot snap;

  IriSet declared_classes;
  IriSet annotation_properties;
  for (const auto& t : graph.match(std::nullopt, rdf_type, std::nullopt)) {
    if (!t.subject.is_iri() || !t.object.is_iri()) continue;
    const auto& kind = t.object.value();
    const auto& iri = t.subject.value();
    if (kind == vocab::kOwlClass || kind == vocab::kRdfsClass) declared_classes.insert(iri);
    else if (kind == vocab::kOwlObjectProperty) snap.object_properties.insert(iri);
    else if (kind == vocab::kOwlDatatypeProperty) snap.data_properties.insert(iri);
    else if (kind == vocab::kOwlAnnotationProperty) annotation_properties.insert(iri);
  }

  snap.classes = declared_classes;
  for (const auto& t : graph.match(std::nullopt, Term::iri(vocab::kRdfsSubClassOf), std::nullopt)) {
    if (t.subject.is_iri()) snap.classes.insert(t.subject.value());
    if (t.object.is_iri()) snap.classes.insert(t.object.value());
  }
  snap.classes.erase(vocab::kOwlThing);
  snap.classes.erase(vocab::kOwlNothing);

  std::vector<std::string> offenders;
  auto all_iris = snap.classes;
  all_iris.insert(snap.object_properties.begin(), snap.object_properties.end());
  all_iris.insert(snap.data_properties.begin(), snap.data_properties.end());
  for (const auto& iri : all_iris) {
    int kinds = static_cast<int>(snap.classes.count(iri)) +
                static_cast<int>(snap.object_properties.count(iri)) +
                static_cast<int>(snap.data_properties.count(iri));
    if (kinds > 1) offenders.push_back(iri);
  }
  if (!offenders.empty()) throw ConflictingDeclaration(std::move(offenders));

  auto is_schema_entity = [&](const std::string& iri) {
    return snap.classes.count(iri) != 0 || snap.is_property(iri) ||
           annotation_properties.count(iri) != 0;
  };

  for (const auto& t : graph.match(std::nullopt, rdf_type, std::nullopt)) {
    if (!t.subject.is_iri() || !t.object.is_iri()) continue;
    if (snap.classes.count(t.object.value()) == 0) continue;
    if (is_schema_entity(t.subject.value())) continue;
    snap.individuals.insert(t.subject.value());
    snap.type_assertions.emplace(t.subject.value(), t.object.value());
  }

  std::size_t axioms = 0;
  for (const auto& t : graph.triples()) {
    const auto& p = t.predicate.value();
    const bool iri_edge = t.subject.is_iri() && t.object.is_iri();
    bool counted = true;
    if (p == vocab::kRdfType) {
      if (t.object.is_iri() && is_schema_vocabulary(t.object.value())) {
        // declaration
      } else if (t.subject.is_iri() && snap.individuals.count(t.subject.value()) != 0) {
        // type assertion
      } else {
        counted = false;
      }
    } else if (p == vocab::kRdfsSubClassOf) {
      if (iri_edge && snap.classes.count(t.subject.value()) != 0 &&
          snap.classes.count(t.object.value()) != 0) {
        snap.subclass_edges.emplace(t.subject.value(), t.object.value());
      }
    } else if (p == vocab::kRdfsSubPropertyOf) {
      if (iri_edge) snap.subproperty_edges.emplace(t.subject.value(), t.object.value());
    } else if (p == vocab::kRdfsDomain || p == vocab::kRdfsRange) {
      if (iri_edge && snap.is_property(t.subject.value())) {
        auto& target = p == vocab::kRdfsDomain ? snap.domain_of : snap.range_of;
        target[t.subject.value()].insert(t.object.value());
      }
    } else if (p == vocab::kRdfsLabel || p == vocab::kRdfsComment ||
               annotation_properties.count(p) != 0) {
      if (t.subject.is_iri() && t.object.is_literal() &&
          (p == vocab::kRdfsLabel || p == vocab::kRdfsComment)) {
        auto& ann = snap.annotations[t.subject.value()];
        auto& slot = p == vocab::kRdfsLabel ? ann.label : ann.comment;
        if (!slot) slot = t.object.value();
      }
    } else if (snap.is_property(p) && t.subject.is_iri() &&
               snap.individuals.count(t.subject.value()) != 0) {
      // property assertion
    } else {
      counted = false;
    }
    if (!counted && t.subject.is_blank()) counted = true;  // class expressions
    if (counted) ++axioms;
  }
  snap.axiom_total = axioms;
  return snap;
}

EntityKind classify(const OntologySnapshot& snapshot, const std::string& iri) {
  if (snapshot.classes.count(iri) != 0) return EntityKind::Class;
  if (snapshot.object_properties.count(iri) != 0) return EntityKind::ObjectProperty;
  if (snapshot.data_properties.count(iri) != 0) return EntityKind::DataProperty;
  if (snapshot.individuals.count(iri) != 0) return EntityKind::Individual;
  return EntityKind::Unknown;
}

IriSet subclass_closure(const OntologySnapshot& snapshot, const std::string& cls) {
  if (snapshot.classes.count(cls) == 0) throw UnknownClass(cls);
  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& [child, parent] : snapshot.subclass_edges) parents[child].push_back(parent);

  IriSet visited{cls};
  std::deque<std::string> queue{cls};
  while (!queue.empty()) {
    auto current = std::move(queue.front());
    queue.pop_front();
    auto it = parents.find(current);
    if (it == parents.end()) continue;
    for (const auto& parent : it->second) {
      if (visited.insert(parent).second) queue.push_back(parent);
    }
  }
  return visited;
}

IriSet direct_subclasses(const OntologySnapshot& snapshot, const std::string& cls) {
  IriSet out;
  for (const auto& [child, parent] : snapshot.subclass_edges) {
    if (parent == cls) out.insert(child);
  }
  return out;
}

}  // namespace ontoforge
