#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontoforge/ontology.hpp"
#include "ontoforge/rdf.hpp"

namespace ontoforge {

struct BaseMetrics {
  std::size_t class_count = 0;
  std::size_t object_property_count = 0;
  std::size_t data_property_count = 0;
  std::size_t properties_count = 0;
  std::size_t individual_count = 0;
  std::size_t subclass_of_count = 0;
  std::size_t domain_axiom_count = 0;  // on object properties
  std::size_t range_axiom_count = 0;   // on object properties
  std::size_t axiom_total = 0;

  friend bool operator==(const BaseMetrics&, const BaseMetrics&) = default;
};

/// Schema richness metrics. Any ratio whose denominator is zero is reported
/// as 0 and sets `degenerate`.
struct SchemaMetrics {
  double attribute_richness = 0;     // |NA| / |C|
  double inheritance_richness = 0;   // |H| / |C|
  double relationship_richness = 0;  // |P| / (|H| + |P|)
  double axiom_class_ratio = 0;      // axioms / |C|
  double class_relation_ratio = 0;   // |C| / (|H| + |P|)
  bool degenerate = false;
};

enum class DlFeature { AL, C, H, I, F, N, O, D };

struct DlExpressivity {
  std::set<DlFeature> features{DlFeature::AL};
  /// OWL vocabulary seen in the graph that the detector has no letter for.
  std::vector<std::string> unrecognized;

  std::string render() const;
  bool has(DlFeature f) const { return features.count(f) != 0; }
};

BaseMetrics compute_base_metrics(const OntologySnapshot& snapshot);

SchemaMetrics compute_schema_metrics(const BaseMetrics& base);

DlExpressivity detect_dl_expressivity(const Graph& graph, const OntologySnapshot& snapshot);

struct MetricsReport {
  BaseMetrics base;
  SchemaMetrics schema;
  DlExpressivity expressivity;

  /// One "label  value" line per metric; reals with six decimals.
  std::string to_text() const;
  nlohmann::json to_json() const;
};

MetricsReport metrics_report(const Graph& graph, const OntologySnapshot& snapshot);

/// Fixed six-decimal rendering used by every report.
std::string format_metric(double value);

}  // namespace ontoforge
