#pragma once

namespace ontoforge::vocab {

inline constexpr char kRdf[] = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr char kRdfs[] = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr char kOwl[] = "http://www.w3.org/2002/07/owl#";
inline constexpr char kXsd[] = "http://www.w3.org/2001/XMLSchema#";

inline constexpr char kRdfType[] = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr char kRdfLangString[] =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

inline constexpr char kRdfsClass[] = "http://www.w3.org/2000/01/rdf-schema#Class";
inline constexpr char kRdfsSubClassOf[] = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
inline constexpr char kRdfsSubPropertyOf[] =
    "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
inline constexpr char kRdfsDomain[] = "http://www.w3.org/2000/01/rdf-schema#domain";
inline constexpr char kRdfsRange[] = "http://www.w3.org/2000/01/rdf-schema#range";
inline constexpr char kRdfsLabel[] = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr char kRdfsComment[] = "http://www.w3.org/2000/01/rdf-schema#comment";

inline constexpr char kOwlClass[] = "http://www.w3.org/2002/07/owl#Class";
inline constexpr char kOwlThing[] = "http://www.w3.org/2002/07/owl#Thing";
inline constexpr char kOwlNothing[] = "http://www.w3.org/2002/07/owl#Nothing";
inline constexpr char kOwlObjectProperty[] = "http://www.w3.org/2002/07/owl#ObjectProperty";
inline constexpr char kOwlDatatypeProperty[] =
    "http://www.w3.org/2002/07/owl#DatatypeProperty";
inline constexpr char kOwlAnnotationProperty[] =
    "http://www.w3.org/2002/07/owl#AnnotationProperty";
inline constexpr char kOwlFunctionalProperty[] =
    "http://www.w3.org/2002/07/owl#FunctionalProperty";
inline constexpr char kOwlInverseOf[] = "http://www.w3.org/2002/07/owl#inverseOf";
inline constexpr char kOwlCardinality[] = "http://www.w3.org/2002/07/owl#cardinality";
inline constexpr char kOwlMinCardinality[] = "http://www.w3.org/2002/07/owl#minCardinality";
inline constexpr char kOwlMaxCardinality[] = "http://www.w3.org/2002/07/owl#maxCardinality";
inline constexpr char kOwlComplementOf[] = "http://www.w3.org/2002/07/owl#complementOf";
inline constexpr char kOwlUnionOf[] = "http://www.w3.org/2002/07/owl#unionOf";
inline constexpr char kOwlOneOf[] = "http://www.w3.org/2002/07/owl#oneOf";

inline constexpr char kXsdString[] = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr char kXsdInteger[] = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr char kXsdDecimal[] = "http://www.w3.org/2001/XMLSchema#decimal";
inline constexpr char kXsdDouble[] = "http://www.w3.org/2001/XMLSchema#double";
inline constexpr char kXsdBoolean[] = "http://www.w3.org/2001/XMLSchema#boolean";

}  // namespace ontoforge::vocab
