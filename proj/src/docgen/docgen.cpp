#include "ontoforge/docgen.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "ontoforge/naming.hpp"

namespace ontoforge {

namespace {

std::string fold(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += static_cast<char>(std::tolower(u));
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "entity" : out;
}

std::string compact(const std::string& iri, const PrefixMap& prefixes) {
  return format_turtle_term(Term::iri(iri), prefixes);
}

std::string join(const std::vector<std::string>& items) {
  if (items.empty()) return "none";
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string escape_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

class Labeler {
 public:
  Labeler(const OntologySnapshot& s, const PrefixMap& p) : s_(s), p_(p) {}

  std::string operator()(const std::string& iri) const {
    if (s_.classes.count(iri) != 0 || s_.is_property(iri) || s_.individuals.count(iri) != 0) {
      return display_label(s_, iri);
    }
    return compact(iri, p_);
  }

  std::vector<std::string> sorted(const std::set<std::string>& iris) const {
    std::vector<std::pair<std::string, std::string>> keyed;
    for (const auto& i : iris) keyed.emplace_back((*this)(i), i);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      auto fa = fold(a.first);
      auto fb = fold(b.first);
      return fa != fb ? fa < fb : a.second < b.second;
    });
    std::vector<std::string> out;
    for (auto& [label, iri] : keyed) out.push_back(label);
    return out;
  }

  std::vector<std::string> order(const std::set<std::string>& iris) const {
    std::vector<std::string> out(iris.begin(), iris.end());
    std::sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
      auto fa = fold((*this)(a));
      auto fb = fold((*this)(b));
      return fa != fb ? fa < fb : a < b;
    });
    return out;
  }

 private:
  const OntologySnapshot& s_;
  const PrefixMap& p_;
};

std::optional<std::string> comment_of(const OntologySnapshot& s, const std::string& iri) {
  auto it = s.annotations.find(iri);
  if (it == s.annotations.end()) return std::nullopt;
  return it->second.comment;
}

}  // namespace

std::string fallback_label(std::string_view iri) {
  const auto local = local_name(iri);
  std::string out;
  for (std::size_t i = 0; i < local.size(); ++i) {
    const auto c = static_cast<unsigned char>(local[i]);
    if (local[i] == '_' || local[i] == '-' || std::isspace(c)) {
      if (!out.empty() && out.back() != ' ') out += ' ';
      continue;
    }
    if (std::isupper(c) && i > 0 && !out.empty() && out.back() != ' ') {
      const auto prev = static_cast<unsigned char>(local[i - 1]);
      const bool next_lower = i + 1 < local.size() && std::islower(static_cast<unsigned char>(local[i + 1]));
      if (std::islower(prev) || std::isdigit(prev) || (std::isupper(prev) && next_lower)) out += ' ';
    }
    out += local[i];
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string display_label(const OntologySnapshot& snapshot, const std::string& iri) {
  auto it = snapshot.annotations.find(iri);
  if (it != snapshot.annotations.end() && it->second.label) return *it->second.label;
  return fallback_label(iri);
}

DocBundle build_doc_bundle(const OntologySnapshot& s, const std::vector<GlossaryEntry>& glossary,
                           const PrefixMap& prefixes, const std::string& title) {
  Labeler label(s, prefixes);
  DocBundle doc;
  doc.title = title;
  doc.glossary = glossary;
  std::sort(doc.glossary.begin(), doc.glossary.end(), [](const GlossaryEntry& a, const GlossaryEntry& b) {
    auto fa = fold(a.term);
    auto fb = fold(b.term);
    return fa != fb ? fa < fb : a.term < b.term;
  });

  std::map<std::string, IriSet> parents;
  std::map<std::string, IriSet> children;
  for (const auto& [child, parent] : s.subclass_edges) {
    if (s.classes.count(child) == 0 || s.classes.count(parent) == 0) continue;
    parents[child].insert(parent);
    children[parent].insert(child);
  }

  std::set<std::string> used_anchors;
  auto anchor = [&](const std::string& kind, const std::string& iri) {
    auto base = kind + "-" + slug(local_name(iri));
    auto a = base;
    for (int n = 2; !used_anchors.insert(a).second; ++n) a = base + "-" + std::to_string(n);
    return a;
  };

  for (const auto& c : label.order(s.classes)) {
    ClassSection sec;
    sec.iri = c;
    sec.name = compact(c, prefixes);
    sec.anchor = anchor("class", c);
    sec.label = label(c);
    sec.comment = comment_of(s, c);
    sec.superclasses = label.sorted(parents[c]);
    sec.subclasses = label.sorted(children[c]);
    IriSet props;
    for (const auto& [p, domains] : s.domain_of) {
      if (domains.count(c) != 0 && s.is_property(p)) props.insert(p);
    }
    sec.properties = label.sorted(props);
    IriSet inds;
    for (const auto& [ind, cls] : s.type_assertions) {
      if (cls == c) inds.insert(ind);
    }
    sec.individuals = label.sorted(inds);
    doc.classes.push_back(std::move(sec));
  }

  IriSet all_props = s.object_properties;
  all_props.insert(s.data_properties.begin(), s.data_properties.end());
  for (const auto& p : label.order(all_props)) {
    PropertySection sec;
    sec.iri = p;
    sec.name = compact(p, prefixes);
    sec.anchor = anchor("property", p);
    sec.label = label(p);
    sec.object_property = s.object_properties.count(p) != 0;
    sec.comment = comment_of(s, p);
    if (auto d = s.domain_of.find(p); d != s.domain_of.end()) sec.domain = label.sorted(d->second);
    if (auto r = s.range_of.find(p); r != s.range_of.end()) sec.range = label.sorted(r->second);
    IriSet supers;
    for (const auto& [child, parent] : s.subproperty_edges) {
      if (child == p) supers.insert(parent);
    }
    sec.superproperties = label.sorted(supers);
    doc.properties.push_back(std::move(sec));
  }

  std::set<std::string> placed;
  std::vector<std::string> path;
  std::function<void(const std::string&, int)> walk = [&](const std::string& c, int depth) {
    doc.hierarchy.push_back({depth, label(c)});
    placed.insert(c);
    path.push_back(c);
    for (const auto& child : label.order(children[c])) {
      if (std::find(path.begin(), path.end(), child) == path.end()) walk(child, depth + 1);
    }
    path.pop_back();
  };
  for (const auto& c : label.order(s.classes)) {
    if (parents[c].empty()) walk(c, 0);
  }
  for (const auto& c : label.order(s.classes)) {
    if (placed.count(c) == 0) walk(c, 0);
  }
  return doc;
}

std::string DocBundle::to_markdown() const {
  std::string out = "# " + title + "\n\n## Contents\n\n";
  out += "- [Class hierarchy](#class-hierarchy)\n- [Classes](#classes)\n";
  for (const auto& c : classes) out += "  - [" + c.label + "](#" + c.anchor + ")\n";
  out += "- [Properties](#properties)\n";
  for (const auto& p : properties) out += "  - [" + p.label + "](#" + p.anchor + ")\n";
  out += "- [Glossary](#glossary)\n\n";

  out += "## Class hierarchy\n\n";
  if (hierarchy.empty()) out += "_None._\n";
  for (const auto& line : hierarchy) {
    out += std::string(static_cast<std::size_t>(line.depth) * 2, ' ') + "- " + line.label + "\n";
  }

  out += "\n## Classes\n\n";
  if (classes.empty()) out += "_None._\n\n";
  for (const auto& c : classes) {
    out += "<a id=\"" + c.anchor + "\"></a>\n### " + c.label + "\n\n";
    out += "- IRI: `" + c.name + "`\n";
    out += "- Description: " + c.comment.value_or("(no description)") + "\n";
    out += "- Superclasses: " + join(c.superclasses) + "\n";
    out += "- Subclasses: " + join(c.subclasses) + "\n";
    out += "- Properties: " + join(c.properties) + "\n";
    out += "- Individuals: " + join(c.individuals) + "\n\n";
  }

  out += "## Properties\n\n";
  if (properties.empty()) out += "_None._\n\n";
  for (const auto& p : properties) {
    out += "<a id=\"" + p.anchor + "\"></a>\n### " + p.label + "\n\n";
    out += "- IRI: `" + p.name + "`\n";
    out += std::string("- Kind: ") + (p.object_property ? "object property" : "data property") + "\n";
    out += "- Description: " + p.comment.value_or("(no description)") + "\n";
    out += "- Domain: " + join(p.domain) + "\n";
    out += "- Range: " + join(p.range) + "\n";
    out += "- Superproperties: " + join(p.superproperties) + "\n\n";
  }

  out += "## Glossary\n\n";
  if (glossary.empty()) {
    out += "_None._\n";
  } else {
    out += "| Term | Interpretation |\n| --- | --- |\n";
    for (const auto& g : glossary) out += "| " + escape_cell(g.term) + " | " + escape_cell(g.interpretation) + " |\n";
  }
  return out;
}

std::string emit_markdown_docs(const OntologySnapshot& snapshot, const std::vector<GlossaryEntry>& glossary,
                               const PrefixMap& prefixes, const std::string& title) {
  return build_doc_bundle(snapshot, glossary, prefixes, title).to_markdown();
}

std::vector<std::string> entities_needing_annotation(const OntologySnapshot& s) {
  IriSet all = s.classes;
  all.insert(s.object_properties.begin(), s.object_properties.end());
  all.insert(s.data_properties.begin(), s.data_properties.end());
  std::vector<std::string> out;
  for (const auto& e : all) {
    auto it = s.annotations.find(e);
    if (it == s.annotations.end() || !it->second.label || !it->second.comment) out.push_back(e);
  }
  return out;
}

std::vector<Proposal> annotate_entities(Gateway& gateway, const TemplateLibrary& templates,
                                        const OntologySnapshot& s, const PrefixMap& prefixes,
                                        const std::string& ns, const std::string& language,
                                        const std::string& label) {
  if (s.classes.empty() && s.object_properties.empty() && s.data_properties.empty()) {
    throw PreconditionError("annotation needs a non-empty model");
  }
  const auto& t = templates.get("annotation");
  std::vector<Proposal> out;
  for (const auto& iri : entities_needing_annotation(s)) {
    const auto name = compact(iri, prefixes);
    const char* kind = s.classes.count(iri) != 0              ? "class"
                       : s.object_properties.count(iri) != 0 ? "object property"
                                                              : "data property";
    std::string line = "- " + name + " (" + kind + ")";
    auto ann = s.annotations.find(iri);
    if (ann != s.annotations.end() && ann->second.label) line += " current label: \"" + *ann->second.label + "\"";
    if (ann != s.annotations.end() && ann->second.comment) {
      line += " current comment: \"" + *ann->second.comment + "\"";
    }
    SlotMap slots = {{"language", language}, {"entities", line}};
    auto validator = [&](const Proposal& p) -> std::optional<std::string> {
      const auto entity = p.payload["entity"].get<std::string>();
      if (resolve_name(entity, prefixes, ns, NameStyle::Preserve) != iri) return "entity must be " + name;
      return std::nullopt;
    };
    try {
      auto ps = gateway.ask(t, slots, label + "/" + name, {}, validator);
      for (auto& p : ps) out.push_back(std::move(p));
    } catch (const RepairFailed& e) {
      Proposal p;
      p.kind = ProposalKind::Annotation;
      p.payload = {{"entity", name}, {"comment", e.raw().substr(0, 300)}};
      p.id = proposal_id(p.kind, p.payload);
      p.status = ProposalStatus::Rejected;
      p.reason = "unparseable";
      p.provenance.template_id = t.id;
      p.provenance.technique = to_string(t.technique);
      p.provenance.prompt_hash = prompt_hash(gateway.messages_for(t, slots));
      p.provenance.provider_id = gateway.provider().id();
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace ontoforge
