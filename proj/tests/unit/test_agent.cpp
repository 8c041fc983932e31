#include <doctest.h>

#include "../support.hpp"

#include <insight/agent/backend.hpp>
#include <insight/agent/fewshot.hpp>
#include <insight/agent/prompt.hpp>
#include <insight/agent/session.hpp>
#include <insight/agent/step_parser.hpp>
#include <insight/agent/trace.hpp>
#include <insight/dsl/evaluator.hpp>
#include <insight/dsl/parser.hpp>
#include <insight/resources.hpp>
#include <insight/synthgen.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>

using namespace insight;
using namespace insight::agent;

namespace {

/// Replies from a list, recording every prompt it is sent.
class ListSession : public ModelSession {
 public:
  explicit ListSession(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const std::string& prompt, const std::vector<std::string>&) override {
    prompts.push_back(prompt);
    if (next_ >= replies_.size()) throw BackendError("script exhausted");
    return replies_[next_++];
  }
  std::vector<std::string> prompts;

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

class CountingSearch : public retrieval::SearchTool {
 public:
  std::vector<retrieval::SearchResult> search(std::string_view q, std::size_t k) const override {
    ++calls;
    return retrieval::default_index().search(q, k);
  }
  mutable std::atomic<int> calls{0};
};

std::size_t count(const Trace& t, StepKind kind, std::optional<Tool> tool = std::nullopt) {
  std::size_t n = 0;
  for (const auto& s : t) n += s.kind == kind && (!tool || s.tool == tool);
  return n;
}

TraceStep step(int seq, StepKind kind, std::optional<Tool> tool = std::nullopt, bool ok = true,
               std::string content = "x") {
  return TraceStep{seq, kind, tool, std::move(content), ok};
}

const retrieval::LocalSearch& local_search() {
  static retrieval::LocalSearch s(retrieval::default_index());
  return s;
}

}  // namespace

TEST_CASE("parse_step accepts the grammar") {
  SUBCASE("thought and analyze") {
    auto a = parse_step("Thought: I need the average.\nAct: Analyze(```daily[\"steps\"].during(\"last 7 days\").mean()```)");
    CHECK(a.type == StepAction::Type::act);
    CHECK(a.tool == Tool::analyze);
    CHECK(a.thought == "I need the average.");
    CHECK(a.payload == R"(daily["steps"].during("last 7 days").mean())");
  }
  SUBCASE("search") {
    auto a = parse_step("Act: Search(request='How many days a week should I work out?')");
    CHECK(a.tool == Tool::search);
    CHECK_FALSE(a.thought);
    CHECK(a.payload == "How many days a week should I work out?");
  }
  SUBCASE("fenced multi-line program with a language tag") {
    auto a = parse_step("Thought: two steps\nAct: Analyze(```dsl\nlet x = daily[\"steps\"].mean();\nx / 2\n```)");
    CHECK(a.payload == "let x = daily[\"steps\"].mean();\nx / 2");
  }
  SUBCASE("finish") {
    auto a = parse_step("Thought: done\nFinish: Your average was 62.44 bpm.\nKeep it up.");
    CHECK(a.type == StepAction::Type::finish);
    CHECK(a.payload == "Your average was 62.44 bpm.\nKeep it up.");
  }
  SUBCASE("escaped quote in a search request") {
    auto a = parse_step(R"(Act: Search(request='what\'s a good HRV?'))");
    CHECK(a.payload == "what's a good HRV?");
  }
}

TEST_CASE("parse_step rejects everything else") {
  for (std::string bad : {"Sure! Here's some info about your sleep.", "Thought: only thinking",
                          "Act: Analyze(daily[\"steps\"].mean())", "Act: Plot(```x```)",
                          "Act: Search(request='x') and then more", "Thought: a Act: Search(request='x')",
                          "Act: Search(request=x)", ""}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_step(bad), ProtocolError);
  }
}

TEST_CASE("serialized steps parse back") {
  std::vector<StepAction> actions = {
      {std::nullopt, StepAction::Type::act, Tool::analyze, R"(daily["steps"].mean())"},
      {"think\nmore", StepAction::Type::act, Tool::analyze, "let a = 1;\n(a, 2)"},
      {"look it up", StepAction::Type::act, Tool::search, "what's normal? it's 'fine'"},
      {"done", StepAction::Type::finish, Tool::analyze, "The answer is 3.\nBye."},
      {std::nullopt, StepAction::Type::finish, Tool::analyze, "NO_DATA"},
  };
  for (const auto& a : actions) {
    CAPTURE(serialize_action(a));
    CHECK(parse_step(serialize_action(a)) == a);
  }
  TraceStep act = step(0, StepKind::act, Tool::search, true, "sleep need");
  CHECK(parse_step(serialize_step(act)).payload == "sleep need");
  CHECK(serialize_step(step(0, StepKind::protocol_error)).empty());
}

TEST_CASE("prompt assembly") {
  const std::string card = schema_card();
  SUBCASE("first step") {
    auto p = build_prompt(card, {}, {}, "How did I sleep?");
    CHECK(p.ends_with("Question: How did I sleep?\nThought:"));
    CHECK(p.find(card) != std::string::npos);
    CHECK(p == build_prompt(card, {}, {}, "How did I sleep?"));
  }
  SUBCASE("history goes before the trailing Thought") {
    Trace h = {step(0, StepKind::thought, std::nullopt, true, "check"),
               step(1, StepKind::act, Tool::analyze, true, R"(daily["steps"].mean())"),
               step(2, StepKind::observe, Tool::analyze, true, "8123.5")};
    auto p = build_prompt(card, {}, h, "q");
    const auto q = p.find("Question: q\n");
    REQUIRE(q != std::string::npos);
    const auto act = p.find(serialize_step(h[1]), q);
    const auto obs = p.find(serialize_step(h[2]), q);
    CHECK(act != std::string::npos);
    CHECK(obs > act);
    CHECK(p.ends_with("Thought:"));
    CHECK(serialize_step(h[2]) == "Observe: 8123.5");
  }
  SUBCASE("few-shots appear and disabled tools are not described") {
    const auto& shots = default_agent_few_shots(3, 0);
    auto p = build_prompt(card, shots, {}, "q", {Tool::analyze});
    for (const auto& s : shots) CHECK(p.find("Question: " + s.query) != std::string::npos);
    CHECK(system_instructions({Tool::analyze}).find("Search(") == std::string::npos);
    CHECK(system_instructions().find("Search(") != std::string::npos);
  }
}

TEST_CASE("trace statistics") {
  SUBCASE("no code") {
    Trace t = {step(0, StepKind::act, Tool::search), step(1, StepKind::observe, Tool::search),
               step(2, StepKind::finish)};
    auto s = trace_stats(t);
    CHECK_FALSE(s.used_code);
    CHECK(s.finished);
  }
  SUBCASE("error then success then finish") {
    // Error observed at step 3, success at 5, finish at 7.
    Trace t = {step(0, StepKind::thought), step(1, StepKind::thought), step(2, StepKind::act, Tool::analyze),
               step(3, StepKind::observe, Tool::analyze, false), step(4, StepKind::act, Tool::analyze),
               step(5, StepKind::observe, Tool::analyze, true), step(6, StepKind::thought), step(7, StepKind::finish)};
    CHECK(check_trace(t).empty());
    auto s = trace_stats(t);
    CHECK(s.used_code);
    CHECK(s.had_error);
    CHECK(s.recovered);
  }
  SUBCASE("error, no further analysis") {
    Trace t = {step(0, StepKind::act, Tool::analyze), step(1, StepKind::observe, Tool::analyze, false),
               step(2, StepKind::act, Tool::search), step(3, StepKind::observe, Tool::search), step(4, StepKind::finish)};
    auto s = trace_stats(t);
    CHECK(s.had_error);
    CHECK_FALSE(s.recovered);
  }
  SUBCASE("recovery needs a finish") {
    Trace t = {step(0, StepKind::act, Tool::analyze), step(1, StepKind::observe, Tool::analyze, false),
               step(2, StepKind::act, Tool::analyze), step(3, StepKind::observe, Tool::analyze)};
    CHECK_FALSE(trace_stats(t).recovered);
  }
}

TEST_CASE("trace ordering checks") {
  Trace good = {step(0, StepKind::thought), step(1, StepKind::act, Tool::analyze),
                step(2, StepKind::observe, Tool::analyze), step(3, StepKind::finish)};
  CHECK(check_trace(good).empty());
  Trace gap = good;
  gap[2].seq = 5;
  CHECK_FALSE(check_trace(gap).empty());
  Trace wrong_tool = good;
  wrong_tool[2].tool = Tool::search;
  CHECK_FALSE(check_trace(wrong_tool).empty());
  Trace after_finish = good;
  after_finish.push_back(step(4, StepKind::thought));
  CHECK_FALSE(check_trace(after_finish).empty());
}

TEST_CASE("trace JSONL round trip") {
  Trace t = {step(0, StepKind::thought, std::nullopt, true, "a \"quoted\"\nline"),
             step(1, StepKind::act, Tool::search, true, "q"), step(2, StepKind::observe, Tool::search, false, "#ERROR#: x"),
             step(3, StepKind::protocol_error, std::nullopt, false, "bad")};
  CHECK(parse_trace_jsonl(to_jsonl(t)) == t);
  CHECK(to_json(t[1]) == R"({"seq":1,"kind":"act","tool":"search","content":"q","ok":true})");
  CHECK_THROWS_AS(parse_trace_jsonl(R"({"seq":0,"kind":"dance","content":"","ok":true})"), ParseError);
}

TEST_CASE("scripted backend") {
  auto b = ScriptedBackend::from_jsonl(
      "{\"step\": 0, \"output\": \"A\"}\n{\"step\": 1, \"output\": \"B\"}\n"
      "{\"session\": \"s2\", \"step\": 0, \"output\": \"C\"}\n");
  SessionInfo info;
  auto s1 = b.open(info);
  CHECK(s1->complete("p", {}) == "A");
  CHECK(s1->complete("p", {}) == "B");
  CHECK_THROWS_AS(s1->complete("p", {}), BackendError);
  info.key = "s2";
  auto s2 = b.open(info);
  CHECK(s2->complete("p", {}) == "C");
  CHECK_THROWS_AS(ScriptedBackend::from_jsonl("not json\n"), ParseError);
}

TEST_CASE("backend selection") {
  CHECK(make_backend("oracle")->name() == "oracle");
  CHECK(make_backend("oracle-recover")->name() == "oracle-recover");
  CHECK(make_backend("demo")->name() == "demo");
  CHECK_THROWS_AS(make_backend("gpt-99"), ConfigError);
  CHECK_THROWS_AS(make_backend("scripted:/nonexistent/file.jsonl"), ConfigError);
  const char* url = std::getenv("INSIGHT_LLM_URL");
  if (!url || !*url) CHECK_THROWS_AS(make_backend("remote"), ConfigError);
  CHECK(apply_stop("Act: x\nObserve: 3\nmore", kStopSequences) == "Act: x\n");
  CHECK(apply_stop("no stop", kStopSequences) == "no stop");
}

TEST_CASE("demo trajectory over the BMI fixture") {
  auto ds = testing::bmi_fixture();
  auto backend = make_backend("demo");
  AgentConfig cfg;
  cfg.few_shot_k = 4;
  auto run = [&] { return run_session("Can you tell me how my BMI has changed?", ds, *backend, &local_search(), cfg); };
  auto r = run();
  CHECK(check_trace(r.trace).empty());
  CHECK(count(r.trace, StepKind::act, Tool::analyze) == 2);
  CHECK(count(r.trace, StepKind::act, Tool::search) == 1);
  REQUIRE(r.final_answer);
  CHECK(r.final_answer->find("27.12") != std::string::npos);
  // Observations are the formatted tool output, nothing more.
  for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) {
    if (r.trace[i].kind != StepKind::act) continue;
    const auto& obs = r.trace[i + 1];
    if (obs.tool == Tool::analyze) CHECK(obs.content == dsl::analyze(r.trace[i].content, ds));
    else CHECK(obs.content == retrieval::format_search_observation(retrieval::default_index().search(r.trace[i].content, 3)));
  }
  const auto& first_obs = r.trace.at(2);
  CHECK(first_obs.content.rfind("(27.12", 0) == 0);
  CHECK(to_jsonl(run().trace) == to_jsonl(r.trace));
}

TEST_CASE("sessions driven by hand-written replies") {
  auto ds = testing::rhr_fixture();
  AgentConfig cfg;
  const std::vector<FewShotExample> no_shots;

  SUBCASE("error then recovery") {
    ListSession m({"Thought: get RHR\nAct: Analyze(```daily[\"resting_hr\"].mean()```)",
                   "Thought: wrong column\nAct: Analyze(```daily[\"resting_heart_rate\"].mean()```)",
                   "Finish: Your average resting heart rate was 62.44 bpm."});
    auto r = run_session("avg rhr?", ds, m, nullptr, cfg, no_shots);
    auto st = trace_stats(r.trace);
    CHECK(st.had_error);
    CHECK(st.recovered);
    CHECK(r.trace[2].content == "#ERROR#: UnknownColumn: 'resting_hr'");
    CHECK_FALSE(r.trace[2].ok);
    CHECK(m.prompts[1].find("Observe: #ERROR#: UnknownColumn") != std::string::npos);
  }
  SUBCASE("step cap") {
    std::vector<std::string> replies(10, "Act: Analyze(```daily[\"resting_heart_rate\"].max()```)");
    ListSession m(replies);
    cfg.max_steps = 3;
    auto r = run_session("q", ds, m, nullptr, cfg, no_shots);
    CHECK_FALSE(r.final_answer);
    CHECK(count(r.trace, StepKind::act) == 3);
    CHECK(m.prompts.size() == 3);
    CHECK(check_trace(r.trace).empty());
  }
  SUBCASE("one malformed reply is retried") {
    ListSession m({"Sure! Here's some info...", "Finish: 62.44"});
    auto r = run_session("q", ds, m, nullptr, cfg, no_shots);
    CHECK(r.final_answer == "62.44");
    CHECK(r.protocol_retries == 1);
    CHECK(m.prompts[1].find("did not follow the step format") != std::string::npos);
  }
  SUBCASE("a second malformed reply ends the session") {
    ListSession m({"Sure!", "Still chatting.", "Finish: 1"});
    auto r = run_session("q", ds, m, nullptr, cfg, no_shots);
    CHECK_FALSE(r.final_answer);
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].kind == StepKind::protocol_error);
    CHECK_FALSE(r.trace[0].ok);
  }
  SUBCASE("bare continuation of the trailing Thought") {
    ListSession m({" I know this.\nFinish: 3"});
    auto r = run_session("q", ds, m, nullptr, cfg, no_shots);
    REQUIRE(r.trace.size() == 2);
    CHECK(r.trace[0].content == "I know this.");
  }
  SUBCASE("backend failure") {
    ListSession m({});
    auto r = run_session("q", ds, m, nullptr, cfg, no_shots);
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].kind == StepKind::protocol_error);
    CHECK(r.trace[0].content.rfind("BackendError:", 0) == 0);
  }
  SUBCASE("disabled search is never called") {
    CountingSearch search;
    cfg.tools_enabled = {Tool::analyze};
    ListSession m({"Act: Search(request='resting heart rate')", "Finish: ok"});
    auto r = run_session("q", ds, m, &search, cfg, no_shots);
    CHECK(search.calls == 0);
    CHECK(r.trace[1].content == "#ERROR#: ToolDisabled: search");
    CHECK(m.prompts[0].find("Search(") == std::string::npos);
  }
  SUBCASE("search results are observed") {
    CountingSearch search;
    ListSession m({"Act: Search(request='how much sleep do adults need')", "Finish: ok"});
    auto r = run_session("q", ds, m, &search, cfg, no_shots);
    CHECK(search.calls == 1);
    CHECK(r.trace[1].content.find("Source: ") != std::string::npos);
  }
  SUBCASE("bad config") {
    cfg.max_steps = 0;
    ListSession m({});
    CHECK_THROWS_AS(run_session("q", ds, m, nullptr, cfg, no_shots), ConfigError);
  }
}

TEST_CASE("oracle backend") {
  auto ds = testing::rhr_fixture();
  SessionInfo info;
  info.key = "q1";
  info.dataset = &ds;
  info.gold_program = R"(daily["resting_heart_rate"].mean())";
  AgentConfig cfg;
  {
    auto m = OracleBackend(false).open(info);
    auto r = run_session("q", ds, *m, nullptr, cfg, {});
    REQUIRE(r.final_answer);
    CHECK(*r.final_answer == "62.437917");
    CHECK_FALSE(trace_stats(r.trace).had_error);
  }
  {
    auto m = OracleBackend(true).open(info);
    auto r = run_session("q", ds, *m, nullptr, cfg, {});
    CHECK(trace_stats(r.trace).recovered);
    CHECK(r.trace[1].content == std::string(kBrokenProgram));
  }
}

TEST_CASE("embeddings") {
  HashEmbedder e;
  auto v = e.embed("How many steps did I take yesterday?");
  REQUIRE(v.size() == 256);
  double n = 0;
  for (double x : v) n += x * x;
  CHECK(n == doctest::Approx(1.0));
  CHECK(e.embed("How many steps did I take yesterday?") == v);
  auto z = e.embed("?!");
  CHECK(std::all_of(z.begin(), z.end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("k-means and representatives") {
  std::vector<std::vector<double>> pts = {{0, 0}, {0, 1}, {1, 0}, {10, 10}, {10, 11}, {11, 10}, {0.4, 0.4}};
  auto km = kmeans(pts, 2, 3);
  CHECK(km.assignment[0] == km.assignment[1]);
  CHECK(km.assignment[0] != km.assignment[3]);
  CHECK(km.iterations <= 100);
  auto reps = select_representatives(pts, 2, 3);
  CHECK(reps == std::vector<std::size_t>{3, 6});
  CHECK(select_representatives(pts, pts.size(), 1) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
  // Identical points: every cluster still yields a distinct representative.
  std::vector<std::vector<double>> same(5, std::vector<double>{1, 1});
  auto r = select_representatives(same, 3, 0);
  CHECK(std::set<std::size_t>(r.begin(), r.end()).size() == 3);
}

TEST_CASE("few-shot selection over the shipped pool") {
  const auto& pool = agent_pool();
  CHECK(pool.size() == 60);
  HashEmbedder e;
  auto a = select_few_shots(pool, 20, e, 0);
  CHECK(a.size() == 20);
  for (int i = 0; i < 3; ++i) CHECK(select_few_shots(pool, 20, e, 0) == a);
  std::set<std::string> qs;
  for (const auto& x : a) qs.insert(x.query);
  CHECK(qs.size() == 20);
  CHECK(select_few_shots(pool, pool.size(), e, 5) == pool);
  CHECK_THROWS_AS(select_few_shots(pool, 61, e, 0), InsufficientPool);
  CHECK(select_few_shots(pool, 0, e, 0).empty());
}

TEST_CASE("shipped pools are well formed") {
  for (const auto* pool : {&agent_pool(), &codegen_pool(), &numeric_pool()}) {
    for (const auto& ex : *pool) {
      CAPTURE(ex.query);
      CHECK(check_trace(ex.trajectory).empty());
      REQUIRE_FALSE(ex.trajectory.empty());
      CHECK(ex.trajectory.back().kind == StepKind::finish);
      for (std::size_t i = 0; i < ex.trajectory.size(); ++i) {
        const auto& s = ex.trajectory[i];
        // Programs whose observation failed are deliberate recovery demonstrations.
        const bool observed_ok = i + 1 < ex.trajectory.size() && ex.trajectory[i + 1].ok;
        if (s.kind == StepKind::act && s.tool == Tool::analyze && observed_ok) CHECK_NOTHROW(dsl::parse(s.content));
        if (s.kind == StepKind::act || s.kind == StepKind::finish) {
          StepAction a;
          a.type = s.kind == StepKind::finish ? StepAction::Type::finish : StepAction::Type::act;
          if (s.tool) a.tool = *s.tool;
          a.payload = s.content;
          CHECK(parse_step(serialize_action(a)) == a);
        }
      }
    }
  }
  CHECK(codegen_pool().size() >= 8);
  CHECK(numeric_pool().size() >= 3);
  CHECK_THROWS_AS(parse_pool_jsonl(R"({"query": "q", "trajectory": [{"kind": "thought", "content": "x"}]})"),
                  ParseError);
}

TEST_CASE("pool observations match the analysis output for the persona") {
  // The pools were filled by running the programs against the first default user.
  auto ds = synth::synthesize_user(synth::GeneratorConfig::defaults(), 0);
  int checked = 0;
  for (const auto& ex : agent_pool()) {
    for (std::size_t i = 0; i + 1 < ex.trajectory.size(); ++i) {
      const auto& s = ex.trajectory[i];
      if (s.kind != StepKind::act || s.tool != Tool::analyze) continue;
      CHECK(ex.trajectory[i + 1].content == dsl::analyze(s.content, ds));
      ++checked;
    }
  }
  CHECK(checked > 40);
}
