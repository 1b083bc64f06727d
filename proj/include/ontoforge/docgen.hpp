#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ontoforge/llm.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/rdf.hpp"

namespace ontoforge {

struct GlossaryEntry {
  std::string term;
  std::string interpretation;

  friend bool operator==(const GlossaryEntry&, const GlossaryEntry&) = default;
};

/// "…#VehicleType" -> "Vehicle Type"; "…#has_fuel" -> "has fuel".
std::string fallback_label(std::string_view iri);

/// rdfs:label when present, otherwise fallback_label.
std::string display_label(const OntologySnapshot& snapshot, const std::string& iri);

struct ClassSection {
  std::string iri;
  std::string name;  // compact form
  std::string anchor;
  std::string label;
  std::optional<std::string> comment;
  std::vector<std::string> superclasses;  // labels
  std::vector<std::string> subclasses;    // labels
  std::vector<std::string> properties;    // labels of properties with this domain
  std::vector<std::string> individuals;   // labels
};

struct PropertySection {
  std::string iri;
  std::string name;
  std::string anchor;
  std::string label;
  bool object_property = true;
  std::optional<std::string> comment;
  std::vector<std::string> domain;
  std::vector<std::string> range;
  std::vector<std::string> superproperties;
};

struct OutlineLine {
  int depth = 0;
  std::string label;
};

struct DocBundle {
  std::string title;
  std::vector<OutlineLine> hierarchy;
  std::vector<ClassSection> classes;
  std::vector<PropertySection> properties;
  std::vector<GlossaryEntry> glossary;

  std::string to_markdown() const;
};

DocBundle build_doc_bundle(const OntologySnapshot& snapshot, const std::vector<GlossaryEntry>& glossary,
                           const PrefixMap& prefixes, const std::string& title = "Ontology");

std::string emit_markdown_docs(const OntologySnapshot& snapshot, const std::vector<GlossaryEntry>& glossary,
                               const PrefixMap& prefixes, const std::string& title = "Ontology");

/// Classes and properties missing an rdfs:label or an rdfs:comment, sorted.
std::vector<std::string> entities_needing_annotation(const OntologySnapshot& snapshot);

/// One annotation request per entity lacking a label or comment. The request
/// label is `label + "/" + <compact entity name>`.
std::vector<Proposal> annotate_entities(Gateway& gateway, const TemplateLibrary& templates,
                                        const OntologySnapshot& snapshot, const PrefixMap& prefixes,
                                        const std::string& ns, const std::string& language,
                                        const std::string& label);

}  // namespace ontoforge
