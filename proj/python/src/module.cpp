#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ontoforge/llm.hpp"
#include "ontoforge/metrics.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/pipeline.hpp"
#include "ontoforge/rdf.hpp"
#include "ontoforge/sparql.hpp"
#include "ontoforge/testkit.hpp"

namespace py = pybind11;
using namespace ontoforge;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::list findings(const std::vector<PitfallFinding>& fs) {
  py::list out;
  for (const auto& f : fs) {
    py::dict d;
    d["check"] = to_string(f.check);
    d["severity"] = to_string(f.severity);
    d["subject"] = f.subject;
    d["message"] = f.message;
    d["members"] = f.members;
    out.append(d);
  }
  return out;
}

struct PyGraph {
  Graph graph;
  PrefixMap prefixes;

  static PyGraph parse(const std::string& text) {
    auto doc = parse_turtle(text);
    return {std::move(doc.graph), std::move(doc.prefixes)};
  }

  std::vector<std::tuple<std::string, std::string, std::string>> triples() const {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& t : graph.triples()) {
      out.emplace_back(t.subject.canonical(), t.predicate.canonical(), t.object.canonical());
    }
    return out;
  }

  py::list query(const std::string& text) const {
    const auto rs = sparql::evaluate(graph, sparql::parse_query(text, &prefixes));
    py::list rows;
    for (const auto& row : rs.rows) {
      py::dict d;
      for (std::size_t i = 0; i < rs.variables.size(); ++i) d[py::str(rs.variables[i])] = format_turtle_term(row[i], prefixes);
      rows.append(d);
    }
    return rows;
  }
};

}  // namespace

PYBIND11_MODULE(_ontoforge, m) {
  m.doc() = "Ontology engineering toolkit: Turtle store, metrics, SPARQL subset, pitfall tests, projects.";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<SyntaxError> syntax(m, "TurtleSyntaxError", error.ptr());
  static py::exception<UnknownPrefix> prefix(m, "UnknownPrefix", error.ptr());
  static py::exception<ParseError> parse(m, "ParseError", error.ptr());
  static py::exception<IoError> io(m, "IoError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    auto raise = [](PyObject* type, const std::string& what, std::optional<SourcePos> pos) {
      py::object e = py::reinterpret_borrow<py::object>(type)(what);
      if (pos) {
        e.attr("line") = pos->line;
        e.attr("column") = pos->column;
      }
      PyErr_SetObject(type, e.ptr());
    };
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SyntaxError& e) {
      raise(syntax.ptr(), e.what(), e.pos());
    } catch (const UnknownPrefix& e) {
      raise(prefix.ptr(), e.what(), e.pos());
    } catch (const ParseError& e) {
      raise(parse.ptr(), e.what(), e.pos());
    } catch (const IoError& e) {
      raise(io.ptr(), e.what(), std::nullopt);
    } catch (const Error& e) {
      raise(error.ptr(), e.what(), std::nullopt);
    }
  });

  py::class_<PyGraph>(m, "Graph", "An in-memory RDF graph with the prefixes it was parsed with.")
      .def(py::init<>())
      .def_static("parse", &PyGraph::parse, py::arg("text"), "Parses Turtle.")
      .def("__len__", [](const PyGraph& g) { return g.graph.size(); })
      .def("triples", &PyGraph::triples, "Triples as N-Triples style term strings.")
      .def("to_turtle", [](const PyGraph& g) { return serialize_turtle(g.graph, g.prefixes); })
      .def("isomorphic", [](const PyGraph& a, const PyGraph& b) { return graphs_equal(a.graph, b.graph); })
      .def("metrics", [](const PyGraph& g) { return to_python(metrics_report(g.graph, extract_snapshot(g.graph)).to_json()); })
      .def("metrics_text", [](const PyGraph& g) { return metrics_report(g.graph, extract_snapshot(g.graph)).to_text(); })
      .def("dl_expressivity",
           [](const PyGraph& g) { return detect_dl_expressivity(g.graph, extract_snapshot(g.graph)).render(); })
      .def("query", &PyGraph::query, py::arg("sparql"), "Runs a SELECT query; rows map variable names to terms.")
      .def("model_tests", [](const PyGraph& g) { return findings(run_model_tests(g.graph, extract_snapshot(g.graph))); })
      .def("data_tests", [](const PyGraph& g) { return findings(run_data_tests(g.graph, extract_snapshot(g.graph))); });

  m.def("load_project", [](const std::filesystem::path& path) { return to_python(to_json(load_project(path))); },
        py::arg("path"), "Project file contents after validation.");
  m.def("project_summary", [](const std::filesystem::path& path) { return to_python(project_summary(load_project(path))); },
        py::arg("path"));
  m.def(
      "project_tests",
      [](const std::filesystem::path& path, const std::string& tier) {
        const auto t = parse_test_tier(tier);
        if (!t) throw PreconditionError("unknown test tier '" + tier + "'");
        return to_python(run_project_tests(load_project(path), *t).to_json());
      },
      py::arg("path"), py::arg("tier") = "all");
  m.def(
      "replay_identical",
      [](const std::filesystem::path& path, const std::filesystem::path& mock_dir) {
        const auto p = load_project(path);
        MockProvider provider(mock_dir);
        Gateway gateway(provider);
        const auto again = replay_log(p.log, gateway, TemplateLibrary::builtin());
        return to_json(again).dump() == to_json(p).dump();
      },
      py::arg("path"), py::arg("mock_dir"), "Rebuilds the project from its log with recorded replies.");
}
