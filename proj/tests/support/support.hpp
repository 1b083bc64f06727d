#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ontoforge/rdf.hpp"

namespace testsupport {

inline std::filesystem::path fixture_dir() { return ONTOFORGE_FIXTURE_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture(const std::string& rel) { return read_file(fixture_dir() / rel); }

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("ontoforge-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Small-vocabulary random graph so that patterns hit often.
inline ontoforge::Graph random_graph(std::mt19937& rng, std::size_t n_triples,
                                     std::size_t n_nodes = 8, std::size_t n_preds = 3,
                                     bool with_literals = true) {
  using ontoforge::Term;
  std::uniform_int_distribution<std::size_t> node(0, n_nodes - 1);
  std::uniform_int_distribution<std::size_t> pred(0, n_preds - 1);
  std::uniform_int_distribution<int> lit(0, 3);
  std::uniform_int_distribution<int> num(0, 60);
  ontoforge::Graph g;
  std::size_t guard = 0;
  while (g.size() < n_triples && guard++ < n_triples * 50) {
    Term s = Term::iri("http://r/n" + std::to_string(node(rng)));
    Term p = Term::iri("http://r/p" + std::to_string(pred(rng)));
    Term o;
    if (with_literals && lit(rng) == 0) {
      o = Term::literal(std::to_string(num(rng)), "http://www.w3.org/2001/XMLSchema#integer");
    } else {
      o = Term::iri("http://r/n" + std::to_string(node(rng)));
    }
    g.insert(s, p, o);
  }
  return g;
}

}  // namespace testsupport
