#pragma once

#include <insight/errors.hpp>

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace insight::retrieval {

struct Document {
  std::string url;
  std::string title;
  std::string body;
};

struct SearchResult {
  std::string url;
  std::string title;
  std::string snippet;
  double score = 0.0;
};

class DuplicateUrl : public Error {
 public:
  using Error::Error;
};

inline constexpr double kK1 = 1.2;
inline constexpr double kB = 0.75;
inline constexpr std::size_t kMaxSnippetChars = 500;

/// Lowercased runs of letters and digits; everything else separates.
std::vector<std::string> tokenize(std::string_view text);

/// Immutable BM25 index. Search is reentrant.
class Index {
 public:
  /// Throws DuplicateUrl, or ParseError for an empty corpus or body.
  explicit Index(std::vector<Document> corpus);

  std::size_t size() const { return docs_.size(); }
  const Document& document(std::size_t i) const { return docs_.at(i); }
  std::size_t document_frequency(std::string_view term) const;
  std::size_t document_length(std::size_t i) const { return lengths_.at(i); }
  double average_length() const { return avg_len_; }

  /// BM25 with idf = ln((N - df + 0.5) / (df + 0.5) + 1); each distinct
  /// query term counts once.
  double score(std::size_t doc, std::string_view query) const;

  /// Top-k documents with a positive score, by score then ingestion order.
  std::vector<SearchResult> search(std::string_view query, std::size_t k = 3) const;

 private:
  std::vector<Document> docs_;
  std::vector<std::size_t> lengths_;
  std::vector<std::unordered_map<std::string, std::size_t>> tf_;
  std::unordered_map<std::string, std::size_t> df_;
  double avg_len_ = 0.0;

  double term_score(std::size_t doc, const std::string& term) const;
};

/// Word-aligned window of `body` (at most max_chars) holding the most
/// query-term occurrences; the earliest such window wins ties. Always a
/// verbatim substring of `body`.
std::string make_snippet(std::string_view body, std::string_view query,
                         std::size_t max_chars = kMaxSnippetChars);

/// Title, snippet and "Source: <url>" per result, blank-line separated;
/// "NO_RESULTS" when empty.
std::string format_search_observation(const std::vector<SearchResult>& results);

/// Corpus JSONL: {"url", "title", "body"} per line.
std::vector<Document> parse_corpus_jsonl(std::string_view text);

/// Index over the shipped health-knowledge corpus.
const Index& default_index();

/// What the agent's Search act calls.
class SearchTool {
 public:
  virtual ~SearchTool() = default;
  virtual std::vector<SearchResult> search(std::string_view query, std::size_t k) const = 0;
};

class LocalSearch : public SearchTool {
 public:
  explicit LocalSearch(const Index& index) : index_(index) {}
  std::vector<SearchResult> search(std::string_view query, std::size_t k) const override {
    return index_.search(query, k);
  }

 private:
  const Index& index_;
};

/// GET <endpoint>?q=<query>&k=<k>, expecting a JSON list of
/// {url, title, snippet, score?}. Transport failures throw Error.
class RemoteSearch : public SearchTool {
 public:
  explicit RemoteSearch(std::string endpoint) : endpoint_(std::move(endpoint)) {}
  std::vector<SearchResult> search(std::string_view query, std::size_t k) const override;

 private:
  std::string endpoint_;
};

/// RemoteSearch when INSIGHT_SEARCH_URL is set, else the local corpus.
std::shared_ptr<SearchTool> default_search_tool();

}  // namespace insight::retrieval
