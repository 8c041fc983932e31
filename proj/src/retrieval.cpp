#include <insight/retrieval.hpp>

#include <insight/http_client.hpp>
#include <insight/resources.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>

namespace insight::retrieval {

using json = nlohmann::json;

namespace {

bool word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::vector<std::string> unique_terms(std::string_view query) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& t : tokenize(query)) {
    if (seen.insert(t).second) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (word_char(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Index::Index(std::vector<Document> corpus) : docs_(std::move(corpus)) {
  if (docs_.empty()) throw ParseError("search corpus is empty");
  std::set<std::string> urls;
  std::size_t total = 0;
  for (const auto& d : docs_) {
    if (!urls.insert(d.url).second) throw DuplicateUrl("duplicate document url '" + d.url + "'");
    if (tokenize(d.body).empty()) throw ParseError("document '" + d.url + "' has an empty body");
    std::unordered_map<std::string, std::size_t> tf;
    const auto tokens = tokenize(d.body);
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [t, _] : tf) ++df_[t];
    lengths_.push_back(tokens.size());
    total += tokens.size();
    tf_.push_back(std::move(tf));
  }
  avg_len_ = double(total) / double(docs_.size());
}

std::size_t Index::document_frequency(std::string_view term) const {
  auto it = df_.find(std::string(term));
  return it == df_.end() ? 0 : it->second;
}

double Index::term_score(std::size_t doc, const std::string& term) const {
  auto tf_it = tf_[doc].find(term);
  if (tf_it == tf_[doc].end()) return 0.0;
  const double n = double(docs_.size());
  const double df = double(df_.at(term));
  const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
  const double tf = double(tf_it->second);
  const double norm = kK1 * (1.0 - kB + kB * double(lengths_[doc]) / avg_len_);
  return idf * tf * (kK1 + 1.0) / (tf + norm);
}

double Index::score(std::size_t doc, std::string_view query) const {
  double s = 0.0;
  for (const auto& t : unique_terms(query)) s += term_score(doc, t);
  return s;
}

std::vector<SearchResult> Index::search(std::string_view query, std::size_t k) const {
  const auto terms = unique_terms(query);
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    double s = 0.0;
    for (const auto& t : terms) s += term_score(i, t);
    if (s > 0.0) scored.emplace_back(s, i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  if (scored.size() > k) scored.resize(k);
  std::vector<SearchResult> out;
  for (const auto& [s, i] : scored) {
    const Document& d = docs_[i];
    out.push_back(SearchResult{d.url, d.title, make_snippet(d.body, query), s});
  }
  return out;
}

std::string make_snippet(std::string_view body, std::string_view query, std::size_t max_chars) {
  if (body.size() <= max_chars) return std::string(body);
  const auto terms = unique_terms(query);
  const std::set<std::string> wanted(terms.begin(), terms.end());

  // Whitespace-delimited words with their spans and query-term hit counts.
  struct Word {
    std::size_t begin, end;
    int hits;
  };
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    if (i >= body.size()) break;
    const std::size_t start = i;
    while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    int hits = 0;
    for (const auto& t : tokenize(body.substr(start, i - start))) hits += wanted.count(t) ? 1 : 0;
    words.push_back({start, i, hits});
  }
  if (words.empty()) return std::string(body.substr(0, max_chars));

  std::size_t best_begin = 0, best_end = 0;
  int best_hits = -1;
  std::size_t j = 0;
  int window_hits = 0;
  for (std::size_t a = 0; a < words.size(); ++a) {
    if (j < a) {
      j = a;
      window_hits = 0;
    }
    while (j < words.size() && words[j].end - words[a].begin <= max_chars) window_hits += words[j++].hits;
    std::size_t end;
    int hits;
    if (j == a) {
      // A single word longer than the limit: cut it.
      end = words[a].begin + max_chars;
      hits = words[a].hits;
    } else {
      end = words[j - 1].end;
      hits = window_hits;
    }
    if (hits > best_hits) {
      best_hits = hits;
      best_begin = words[a].begin;
      best_end = end;
    }
    if (j > a) window_hits -= words[a].hits;
  }
  return std::string(body.substr(best_begin, best_end - best_begin));
}

std::string format_search_observation(const std::vector<SearchResult>& results) {
  if (results.empty()) return "NO_RESULTS";
  std::string out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i) out += "\n\n";
    out += results[i].title + "\n" + results[i].snippet + "\nSource: " + results[i].url;
  }
  return out;
}

std::vector<Document> parse_corpus_jsonl(std::string_view text) {
  std::vector<Document> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      out.push_back(Document{j.at("url"), j.at("title"), j.at("body")});
    } catch (const json::exception& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

const Index& default_index() {
  static const Index index(parse_corpus_jsonl(resources::get("corpus.jsonl")));
  return index;
}

std::vector<SearchResult> RemoteSearch::search(std::string_view query, std::size_t k) const {
  const char sep = endpoint_.find('?') == std::string::npos ? '?' : '&';
  const std::string url = endpoint_ + sep + "q=" + http::url_encode(std::string(query)) +
                          "&k=" + std::to_string(k);
  const http::Response r = http::get(url);
  if (r.status != 200) throw http::TransportError("search endpoint returned HTTP " + std::to_string(r.status));
  std::vector<SearchResult> out;
  try {
    const json j = json::parse(r.body);
    const json& list = j.is_object() && j.contains("results") ? j.at("results") : j;
    for (const auto& item : list) {
      SearchResult s;
      s.url = item.value("url", "");
      s.title = item.value("title", "");
      s.snippet = item.value("snippet", "");
      if (s.snippet.size() > kMaxSnippetChars) s.snippet = make_snippet(s.snippet, query);
      s.score = item.value("score", 0.0);
      out.push_back(std::move(s));
      if (out.size() >= k) break;
    }
  } catch (const json::exception& e) {
    throw http::TransportError(std::string("search endpoint sent malformed JSON: ") + e.what());
  }
  return out;
}

std::shared_ptr<SearchTool> default_search_tool() {
  if (const char* url = std::getenv("INSIGHT_SEARCH_URL"); url && *url) {
    return std::make_shared<RemoteSearch>(url);
  }
  return std::make_shared<LocalSearch>(default_index());
}

}  // namespace insight::retrieval
