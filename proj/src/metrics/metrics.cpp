#include <cstdio>

#include "ontoforge/metrics.hpp"
#include "ontoforge/vocab.hpp"

namespace ontoforge {

namespace {

double ratio(std::size_t num, std::size_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::size_t count_for(const std::map<std::string, IriSet>& axioms, const IriSet& props) {
  std::size_t n = 0;
  for (const auto& [prop, targets] : axioms) {
    if (props.count(prop) != 0) n += targets.size();
  }
  return n;
}

// OWL terms the detector understands, either as a letter or as plain
// structure that does not change the label.
const std::set<std::string>& known_owl_terms() {
  static const std::set<std::string> terms = {
      vocab::kOwlClass, vocab::kOwlThing, vocab::kOwlNothing, vocab::kOwlObjectProperty,
      vocab::kOwlDatatypeProperty, vocab::kOwlAnnotationProperty,
      vocab::kOwlFunctionalProperty, vocab::kOwlInverseOf, vocab::kOwlCardinality,
      vocab::kOwlMinCardinality, vocab::kOwlMaxCardinality, vocab::kOwlComplementOf,
      vocab::kOwlUnionOf, vocab::kOwlOneOf,
      std::string(vocab::kOwl) + "Ontology", std::string(vocab::kOwl) + "NamedIndividual",
      std::string(vocab::kOwl) + "Restriction", std::string(vocab::kOwl) + "onProperty",
      std::string(vocab::kOwl) + "imports", std::string(vocab::kOwl) + "versionInfo",
      std::string(vocab::kOwl) + "versionIRI"};
  return terms;
}

}  // namespace

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

BaseMetrics compute_base_metrics(const OntologySnapshot& s) {
  BaseMetrics m;
  m.class_count = s.classes.size();
  m.object_property_count = s.object_properties.size();
  m.data_property_count = s.data_properties.size();
  m.properties_count = m.object_property_count + m.data_property_count;
  m.individual_count = s.individuals.size();
  m.subclass_of_count = s.subclass_edges.size();
  m.domain_axiom_count = count_for(s.domain_of, s.object_properties);
  m.range_axiom_count = count_for(s.range_of, s.object_properties);
  m.axiom_total = s.axiom_total;
  return m;
}

SchemaMetrics compute_schema_metrics(const BaseMetrics& base) {
  SchemaMetrics m;
  const std::size_t c = base.class_count;
  const std::size_t h = base.subclass_of_count;
  const std::size_t p = base.object_property_count;
  m.attribute_richness = ratio(base.data_property_count, c, m.degenerate);
  m.inheritance_richness = ratio(h, c, m.degenerate);
  m.relationship_richness = ratio(p, h + p, m.degenerate);
  m.axiom_class_ratio = ratio(base.axiom_total, c, m.degenerate);
  m.class_relation_ratio = ratio(c, h + p, m.degenerate);
  return m;
}

std::string DlExpressivity::render() const {
  std::string out = "AL";
  if (has(DlFeature::C)) out += "C";
  if (has(DlFeature::H)) out += "H";
  if (has(DlFeature::I)) out += "I";
  if (has(DlFeature::F)) out += "F";
  if (has(DlFeature::N)) out += "N";
  if (has(DlFeature::O)) out += "O";
  if (has(DlFeature::D)) out += "(D)";
  return out;
}

DlExpressivity detect_dl_expressivity(const Graph& graph, const OntologySnapshot& snapshot) {
  DlExpressivity dl;
  if (!snapshot.data_properties.empty()) dl.features.insert(DlFeature::D);
  std::set<std::string> unrecognized;
  const auto& known = known_owl_terms();
  auto note_owl = [&](const Term& t) {
    if (t.is_iri() && t.value().rfind(vocab::kOwl, 0) == 0 && known.count(t.value()) == 0) {
      unrecognized.insert(t.value());
    }
  };

  for (const auto& t : graph.triples()) {
    const auto& p = t.predicate.value();
    if (p == vocab::kRdfsSubPropertyOf) dl.features.insert(DlFeature::H);
    else if (p == vocab::kOwlInverseOf) dl.features.insert(DlFeature::I);
    else if (p == vocab::kOwlCardinality || p == vocab::kOwlMinCardinality ||
             p == vocab::kOwlMaxCardinality) dl.features.insert(DlFeature::N);
    else if (p == vocab::kOwlComplementOf || p == vocab::kOwlUnionOf) dl.features.insert(DlFeature::C);
    else if (p == vocab::kOwlOneOf) dl.features.insert(DlFeature::O);

    if (p == vocab::kRdfType && t.object.is_iri() &&
        t.object.value() == vocab::kOwlFunctionalProperty) {
      dl.features.insert(DlFeature::F);
    }
    if (t.object.is_literal() && !t.object.datatype().empty()) {
      dl.features.insert(DlFeature::D);
    }
    note_owl(t.predicate);
    if (p == vocab::kRdfType) note_owl(t.object);
  }
  dl.unrecognized.assign(unrecognized.begin(), unrecognized.end());
  return dl;
}

MetricsReport metrics_report(const Graph& graph, const OntologySnapshot& snapshot) {
  MetricsReport r;
  r.base = compute_base_metrics(snapshot);
  r.schema = compute_schema_metrics(r.base);
  r.expressivity = detect_dl_expressivity(graph, snapshot);
  return r;
}

std::string MetricsReport::to_text() const {
  std::string out;
  auto line = [&](const std::string& label, const std::string& value) {
    out += label + "  " + value + "\n";
  };
  auto count = [&](const std::string& label, std::size_t v) { line(label, std::to_string(v)); };

  out += "Base Metrics\n";
  count("Axioms", base.axiom_total);
  count("Class count", base.class_count);
  count("Object property count", base.object_property_count);
  count("Data property count", base.data_property_count);
  count("Properties count", base.properties_count);
  count("Individual count", base.individual_count);
  count("SubClassOf axioms count", base.subclass_of_count);
  count("Object property domain axioms count", base.domain_axiom_count);
  count("Object property range axioms count", base.range_axiom_count);
  line("DL expressivity", expressivity.render());
  out += "Schema Metrics\n";
  line("Attribute richness (AR)", format_metric(schema.attribute_richness));
  line("Inheritance richness (IR)", format_metric(schema.inheritance_richness));
  line("Relationship richness (RR)", format_metric(schema.relationship_richness));
  line("Axiom/class ratio", format_metric(schema.axiom_class_ratio));
  line("Class/relation ratio", format_metric(schema.class_relation_ratio));
  if (schema.degenerate) line("Degenerate", "true (zero denominator; affected ratios set to 0)");
  if (!expressivity.unrecognized.empty()) {
    std::string joined;
    for (const auto& u : expressivity.unrecognized) joined += (joined.empty() ? "" : " ") + u;
    line("Unrecognized constructs", joined);
  }
  return out;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["base"] = {{"axioms", base.axiom_total},
               {"class_count", base.class_count},
               {"object_property_count", base.object_property_count},
               {"data_property_count", base.data_property_count},
               {"properties_count", base.properties_count},
               {"individual_count", base.individual_count},
               {"subclass_of_count", base.subclass_of_count},
               {"domain_axiom_count", base.domain_axiom_count},
               {"range_axiom_count", base.range_axiom_count}};
  j["schema"] = {{"attribute_richness", format_metric(schema.attribute_richness)},
                 {"inheritance_richness", format_metric(schema.inheritance_richness)},
                 {"relationship_richness", format_metric(schema.relationship_richness)},
                 {"axiom_class_ratio", format_metric(schema.axiom_class_ratio)},
                 {"class_relation_ratio", format_metric(schema.class_relation_ratio)},
                 {"degenerate", schema.degenerate}};
  j["dl_expressivity"] = expressivity.render();
  j["unrecognized_constructs"] = expressivity.unrecognized;
  return j;
}

}  // namespace ontoforge
