#include <doctest.h>

#include <insight/retrieval.hpp>

#include <cmath>

using namespace insight;
using namespace insight::retrieval;

namespace {

std::vector<Document> three_docs() {
  return {
      {"https://a.example.org", "Sleep basics", "Adults need seven to nine hours of sleep. Sleep matters."},
      {"https://b.example.org", "Cardio", "Cardio training like biking and running strengthens the heart."},
      {"https://c.example.org", "Rest", "Rest days help muscles recover after running."},
  };
}

}  // namespace

TEST_CASE("tokenizer lowercases and splits on punctuation") {
  CHECK(tokenize("Sleep, REM-sleep & 7h!") == std::vector<std::string>{"sleep", "rem", "sleep", "7h"});
  CHECK(tokenize("  ...  ").empty());
}

TEST_CASE("index statistics") {
  Index idx(three_docs());
  CHECK(idx.size() == 3);
  CHECK(idx.document_frequency("sleep") == 1);
  CHECK(idx.document_frequency("running") == 2);
  CHECK(idx.document_frequency("swimming") == 0);
  CHECK(idx.document_length(0) == 10);
  CHECK(idx.average_length() == doctest::Approx((10 + 9 + 7) / 3.0));
}

TEST_CASE("bad corpora") {
  auto docs = three_docs();
  docs.push_back(docs[0]);
  CHECK_THROWS_AS(Index{docs}, DuplicateUrl);
  const std::vector<Document> none, blank{{"u", "t", ""}};
  CHECK_THROWS_AS(Index{none}, ParseError);
  CHECK_THROWS_AS(Index{blank}, ParseError);
}

TEST_CASE("search ranking") {
  Index idx(three_docs());
  SUBCASE("a term in one document ranks it first") {
    auto r = idx.search("heart", 3);
    REQUIRE(r.size() == 1);
    CHECK(r[0].url == "https://b.example.org");
  }
  SUBCASE("no corpus terms") { CHECK(idx.search("zebra quantum", 3).empty()); }
  SUBCASE("k above corpus size returns every match in score order") {
    auto r = idx.search("running sleep rest", 10);
    REQUIRE(r.size() == 3);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].score >= r[i].score);
  }
  SUBCASE("hand-computed score") {
    // "heart" in doc b: df 1, tf 1, |d| 9, avgdl 26/3.
    const double idf = std::log((3 - 1 + 0.5) / (1 + 0.5) + 1);
    const double norm = 1.2 * (1 - 0.75 + 0.75 * 9 / (26.0 / 3));
    CHECK(idx.score(1, "heart") == doctest::Approx(idf * 2.2 / (1 + norm)));
    CHECK(idx.score(1, "heart heart") == idx.score(1, "heart"));
  }
  SUBCASE("deterministic") { CHECK(idx.search("running", 3)[0].url == idx.search("running", 3)[0].url); }
}

TEST_CASE("equal scores keep ingestion order") {
  Index idx({{"u1", "t", "alpha beta"}, {"u2", "t", "alpha beta"}, {"u3", "t", "gamma delta"}});
  auto r = idx.search("alpha", 3);
  REQUIRE(r.size() == 2);
  CHECK(r[0].url == "u1");
  CHECK(r[1].url == "u2");
}

TEST_CASE("another occurrence of a query term never lowers the score") {
  std::string body = "walking improves mood and sleep quality for many adults";
  for (int extra = 0; extra < 6; ++extra) {
    Index before({{"x", "t", body}, {"y", "t", "unrelated text about nutrition and sleep"}});
    Index after({{"x", "t", body + " walking"}, {"y", "t", "unrelated text about nutrition and sleep"}});
    CHECK(after.score(0, "walking") >= before.score(0, "walking"));
    body += " walking";
  }
}

TEST_CASE("snippets") {
  std::string body;
  for (int i = 0; i < 120; ++i) body += "filler" + std::to_string(i) + " ";
  body += "The key guidance is that adults should get enough deep sleep every night. ";
  for (int i = 0; i < 120; ++i) body += "tail" + std::to_string(i) + " ";
  auto s = make_snippet(body, "deep sleep guidance");
  CHECK(s.size() <= kMaxSnippetChars);
  CHECK(body.find(s) != std::string::npos);
  CHECK(s.find("deep sleep") != std::string::npos);
  CHECK(s.front() != ' ');
  CHECK(make_snippet("short body", "nothing") == "short body");
}

TEST_CASE("search observations") {
  CHECK(format_search_observation({}) == "NO_RESULTS");
  std::vector<SearchResult> one{{"https://a", "Title A", "Snippet A", 1.0}};
  CHECK(format_search_observation(one) == "Title A\nSnippet A\nSource: https://a");
  one.push_back({"https://b", "Title B", "Snippet B", 0.5});
  CHECK(format_search_observation(one) ==
        "Title A\nSnippet A\nSource: https://a\n\nTitle B\nSnippet B\nSource: https://b");
}

TEST_CASE("shipped corpus") {
  const auto& idx = default_index();
  CHECK(idx.size() >= 40);
  auto r = idx.search("Should I incorporate more cardio if I already bike?", 3);
  REQUIRE_FALSE(r.empty());
  for (const auto& x : r) CHECK(x.snippet.size() <= kMaxSnippetChars);
  CHECK_THROWS_AS(parse_corpus_jsonl("{\"url\": \"x\"}\n"), ParseError);
}
