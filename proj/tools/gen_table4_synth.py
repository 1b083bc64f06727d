#!/usr/bin/env python3
"""Writes fixtures/table4-synth.ttl: a synthetic ontology with fixed base counts.

42 classes, 31 object properties, 16 data properties, 159 typed individuals,
11 subClassOf axioms, and domain and range axioms on 30 of the object
properties. The last object property is a subproperty of the first, which
gives the ALH(D) expressivity label. Output is deterministic.
"""
import argparse
import pathlib

CLASSES = 42
OBJECT_PROPERTIES = 31
DATA_PROPERTIES = 16
INDIVIDUALS = 159
SUBCLASS_AXIOMS = 11
OBJECT_PROPERTIES_WITH_DOMAIN_RANGE = 30


def cls(i):
    return f"syn:Class{i:02d}"


def render():
    out = [
        "@prefix syn: <http://example.org/table4-synth#> .",
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .",
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .",
        "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .",
        "",
        "<http://example.org/table4-synth> a owl:Ontology .",
        "",
    ]
    # Class02..Class12 sit under Class01; the rest are roots.
    for i in range(1, CLASSES + 1):
        line = f"{cls(i)} a owl:Class"
        if 2 <= i <= SUBCLASS_AXIOMS + 1:
            line += f" ; rdfs:subClassOf {cls(1)}"
        out.append(line + " .")
    out.append("")
    for k in range(1, OBJECT_PROPERTIES + 1):
        line = f"syn:objectProperty{k:02d} a owl:ObjectProperty"
        if k <= OBJECT_PROPERTIES_WITH_DOMAIN_RANGE:
            domain = (k - 1) % CLASSES + 1
            range_ = (k * 7) % CLASSES + 1
            line += f" ; rdfs:domain {cls(domain)} ; rdfs:range {cls(range_)}"
        else:
            line += " ; rdfs:subPropertyOf syn:objectProperty01"
        out.append(line + " .")
    out.append("")
    for k in range(1, DATA_PROPERTIES + 1):
        out.append(f"syn:dataProperty{k:02d} a owl:DatatypeProperty ; "
                   f"rdfs:domain {cls((k * 3) % CLASSES + 1)} ; rdfs:range xsd:string .")
    out.append("")
    for n in range(1, INDIVIDUALS + 1):
        out.append(f"syn:individual{n:03d} a {cls((n - 1) % CLASSES + 1)} .")
    return "\n".join(out) + "\n"


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("-o", "--output", type=pathlib.Path, default=root / "fixtures" / "table4-synth.ttl")
    args = parser.parse_args()
    args.output.write_text(render())


if __name__ == "__main__":
    main()
