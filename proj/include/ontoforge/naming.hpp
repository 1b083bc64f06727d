#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ontoforge/rdf.hpp"

namespace ontoforge {

enum class NameStyle { UpperCamel, LowerCamel, Preserve };

/// Splits on non-alphanumeric characters and joins the words with their first
/// letter capitalised; the first letter then follows `style`.
/// "tech savviness" -> "TechSavviness" (UpperCamel).
std::string camel_case(std::string_view name, NameStyle style);

/// Resolves a name written by a proposal: "<iri>", an absolute IRI, a
/// prefixed name with a bound prefix, or a plain name minted in `ns`.
std::string resolve_name(std::string_view name, const PrefixMap& prefixes, const std::string& ns,
                         NameStyle style);

/// Bare XSD datatype names ("string", "integer", ...) to their IRI.
std::optional<std::string> xsd_datatype(std::string_view name);

/// Local part of an IRI: the text after the last '#', '/' or ':'.
std::string local_name(std::string_view iri);

}  // namespace ontoforge
