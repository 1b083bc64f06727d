#include <algorithm>
#include <cctype>
#include <cmath>

#include "ontoforge/llm.hpp"

namespace ontoforge {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

void CorpusIndex::add(CorpusDocument doc) {
  if (find(doc.id) != nullptr) throw PreconditionError("duplicate document id " + doc.id);
  auto& counts = tf_[doc.id];
  for (auto& term : tokenize(doc.title + " " + doc.text)) ++counts[term];
  for (const auto& [term, n] : counts) ++df_[term];
  docs_.push_back(std::move(doc));
}

std::size_t CorpusIndex::document_frequency(const std::string& term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

std::size_t CorpusIndex::term_frequency(const std::string& doc_id, const std::string& term) const {
  auto d = tf_.find(doc_id);
  if (d == tf_.end()) return 0;
  auto t = d->second.find(term);
  return t == d->second.end() ? 0 : t->second;
}

const CorpusDocument* CorpusIndex::find(const std::string& doc_id) const {
  for (const auto& d : docs_) {
    if (d.id == doc_id) return &d;
  }
  return nullptr;
}

std::vector<RetrievalHit> retrieve(const CorpusIndex& index, std::string_view query, std::size_t k) {
  if (k < 1) throw PreconditionError("retrieve needs k >= 1");
  auto terms = tokenize(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  const double n = static_cast<double>(index.documents().size());

  std::vector<RetrievalHit> hits;
  for (const auto& doc : index.documents()) {
    double score = 0;
    for (const auto& t : terms) {
      const auto tf = index.term_frequency(doc.id, t);
      if (tf == 0) continue;
      score += static_cast<double>(tf) * std::log(1.0 + n / static_cast<double>(index.document_frequency(t)));
    }
    if (score > 0) hits.push_back({doc.id, score});
  }
  std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<Excerpt> excerpts_for(const CorpusIndex& index, const std::vector<RetrievalHit>& hits,
                                  std::size_t max_chars) {
  std::vector<Excerpt> out;
  for (const auto& h : hits) {
    const auto* doc = index.find(h.doc_id);
    if (doc == nullptr) continue;
    std::string text = doc->text;
    for (char& c : text) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    if (text.size() > max_chars) text = text.substr(0, max_chars) + "...";
    out.push_back({h.doc_id, text});
  }
  return out;
}

}  // namespace ontoforge
