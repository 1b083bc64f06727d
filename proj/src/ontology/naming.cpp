#include "ontoforge/naming.hpp"

#include <cctype>

#include "ontoforge/vocab.hpp"

namespace ontoforge {

std::string camel_case(std::string_view name, NameStyle style) {
  std::string out;
  char first = 0;
  bool word_start = true;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u)) {
      word_start = true;
      continue;
    }
    if (first == 0) first = c;
    out += word_start ? static_cast<char>(std::toupper(u)) : c;
    word_start = false;
  }
  if (out.empty()) return out;
  const auto head = static_cast<unsigned char>(out[0]);
  switch (style) {
    case NameStyle::UpperCamel: out[0] = static_cast<char>(std::toupper(head)); break;
    case NameStyle::LowerCamel: out[0] = static_cast<char>(std::tolower(head)); break;
    case NameStyle::Preserve: out[0] = first; break;
  }
  return out;
}

std::string resolve_name(std::string_view name, const PrefixMap& prefixes, const std::string& ns,
                         NameStyle style) {
  if (name.size() >= 2 && name.front() == '<' && name.back() == '>') {
    return std::string(name.substr(1, name.size() - 2));
  }
  if (name.find("://") != std::string_view::npos) return std::string(name);
  if (auto colon = name.find(':'); colon != std::string_view::npos) {
    if (auto expanded = prefixes.expand(name)) return *expanded;
  }
  return ns + camel_case(name, style);
}

std::optional<std::string> xsd_datatype(std::string_view name) {
  static const char* const kNames[] = {"string",  "integer", "int",      "decimal",  "double", "float",
                                       "boolean", "date",    "dateTime", "anyURI",   "long",   "nonNegativeInteger"};
  if (name.rfind("xsd:", 0) == 0) name.remove_prefix(4);
  for (const char* n : kNames) {
    if (name == n) return std::string(vocab::kXsd) + n;
  }
  return std::nullopt;
}

std::string local_name(std::string_view iri) {
  auto pos = iri.find_last_of("#/:");
  return std::string(pos == std::string_view::npos ? iri : iri.substr(pos + 1));
}

}  // namespace ontoforge
