#include <insight/benchgen.hpp>

#include <insight/dsl/parser.hpp>
#include <insight/dsl/value.hpp>
#include <insight/resources.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace insight::bench {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kMaxAttempts = 20;

[[noreturn]] void template_error(const std::string& what) {
  throw ConfigError("template library: " + what);
}

const std::set<std::string> kDomains = {"aggs",       "metrics",    "summable_metrics",
                                        "periods",    "thresholds", "duration_thresholds",
                                        "activities", "present_activities"};

/// Relative period phrases the library may list.
std::optional<PeriodSpec> relative_period(std::string_view phrase) {
  if (phrase == "yesterday") return PeriodSpec{PeriodSpec::Kind::yesterday};
  if (phrase == "last week") return PeriodSpec{PeriodSpec::Kind::last_n_days, 7};
  if (phrase.starts_with("last ") && (phrase.ends_with(" days") || phrase.ends_with(" day"))) {
    std::string_view num = phrase.substr(5, phrase.find(' ', 5) - 5);
    int n = 0;
    auto res = std::from_chars(num.data(), num.data() + num.size(), n);
    if (res.ec == std::errc{} && res.ptr == num.data() + num.size() && n >= 1) {
      return PeriodSpec{PeriodSpec::Kind::last_n_days, n};
    }
  }
  return std::nullopt;
}

PeriodSpec range_spec(Date a, Date b) {
  const std::chrono::year_month_day x{a}, y{b};
  PeriodSpec p{PeriodSpec::Kind::range};
  p.y1 = int(x.year());
  p.m1 = int(unsigned(x.month()));
  p.d1 = int(unsigned(x.day()));
  p.y2 = int(y.year());
  p.m2 = int(unsigned(y.month()));
  p.d2 = int(unsigned(y.day()));
  return p;
}

std::vector<std::string> slot_names(std::string_view pattern) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '$') continue;
    std::size_t j = i + 1;
    while (j < pattern.size() && (std::isupper(static_cast<unsigned char>(pattern[j])) ||
                                  std::isdigit(static_cast<unsigned char>(pattern[j])) ||
                                  pattern[j] == '_')) {
      ++j;
    }
    if (j == i + 1) template_error("stray '$' in pattern '" + std::string(pattern) + "'");
    out.emplace_back(pattern.substr(i + 1, j - i - 1));
    i = j - 1;
  }
  return out;
}

std::string substitute(std::string_view pattern, const std::map<std::string, std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '$') {
      out.push_back(pattern[i]);
      continue;
    }
    std::size_t j = i + 1;
    while (j < pattern.size() && (std::isupper(static_cast<unsigned char>(pattern[j])) ||
                                  std::isdigit(static_cast<unsigned char>(pattern[j])) ||
                                  pattern[j] == '_')) {
      ++j;
    }
    const std::string name(pattern.substr(i + 1, j - i - 1));
    auto it = values.find(name);
    if (it == values.end()) throw std::logic_error("unbound template slot $" + name);
    out += it->second;
    i = j - 1;
  }
  return out;
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  if (step <= 0) return out;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int i = 0; i < n; ++i) out.push_back(std::round((lo + i * step) * 1e6) / 1e6);
  return out;
}

std::array<double, 3> read_grid(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) template_error(what + " must be [lo, hi, step]");
  std::array<double, 3> g{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (g[2] <= 0 || g[0] > g[1]) template_error(what + " has an empty grid");
  return g;
}

/// One sampled slot value.
struct Choice {
  std::string raw;   // substituted into the program
  std::string text;  // substituted into the question
  double number = 0.0;
  PeriodSpec period;
};

/// Slots are filled so that dependencies (`of`, `distinct_from`) come last.
std::vector<std::string> fill_order(const QueryTemplate& t) {
  std::vector<std::string> first, second;
  for (const auto& [name, s] : t.slots) {
    (s.of.empty() && s.distinct_from.empty() ? first : second).push_back(name);
  }
  first.insert(first.end(), second.begin(), second.end());
  return first;
}

std::vector<std::string> present_activities(const UserDataset& ds) {
  std::set<std::string> seen;
  for (const auto& a : ds.activities) seen.insert(a.activity_name);
  return {seen.begin(), seen.end()};
}

class Sampler {
 public:
  Sampler(const TemplateLibrary& lib, const QueryTemplate& tpl, const UserDataset& ds,
          const SlotOverrides& fixed)
      : lib_(lib), tpl_(tpl), ds_(ds), fixed_(fixed), present_(present_activities(ds)) {
    for (const auto& [name, _] : fixed_) {
      if (!tpl_.slots.count(name)) {
        throw DomainExhausted("template '" + tpl_.id + "' has no slot $" + name);
      }
    }
  }

  /// Values for every slot, or DomainExhausted when a domain is empty.
  std::map<std::string, Choice> draw(Rng& rng) const {
    std::map<std::string, Choice> out;
    for (const auto& name : fill_order(tpl_)) out[name] = draw_slot(name, tpl_.slots.at(name), out, rng);
    return out;
  }

 private:
  std::vector<std::string> list_of(const SlotSpec& s, const std::map<std::string, Choice>& done) const {
    std::vector<std::string> v;
    if (s.domain == "metrics") v = lib_.metric_order;
    else if (s.domain == "summable_metrics") v = lib_.summable_metrics;
    else if (s.domain == "activities") {
      for (const auto& [name, _] : lib_.activities) v.push_back(name);
    } else if (s.domain == "present_activities") {
      for (const auto& name : present_) {
        if (lib_.activities.count(name)) v.push_back(name);
      }
    } else if (s.domain == "aggs") {
      for (const auto& [method, _] : lib_.aggs) v.push_back(method);
    }
    if (!s.distinct_from.empty()) {
      const std::string& other = done.at(s.distinct_from).raw;
      v.erase(std::remove(v.begin(), v.end(), other), v.end());
    }
    return v;
  }

  std::string phrase_for(const SlotSpec& s, const std::string& raw) const {
    if (s.domain == "metrics" || s.domain == "summable_metrics") {
      const MetricPhrasing& m = lib_.metrics.at(raw);
      return s.form == "agg" && !m.agg_form.empty() ? m.agg_form : m.name;
    }
    if (s.domain == "activities" || s.domain == "present_activities") {
      const ActivityPhrasing& a = lib_.activities.at(raw);
      if (s.form == "plural") return a.plural;
      if (s.form == "gerund") return a.gerund;
      if (s.form == "did") return a.did;
      return a.name;
    }
    if (s.domain == "aggs") {
      for (const auto& [method, word] : lib_.aggs) {
        if (method == raw) return word;
      }
    }
    return raw;
  }

  Choice number_choice(double v) const {
    Choice c;
    c.number = v;
    c.raw = c.text = dsl::format_number(v);
    return c;
  }

  Choice period_choice(const std::string& phrase) const {
    for (const auto& p : lib_.periods) {
      if (p.phrase == phrase) return Choice{p.phrase, p.text, 0.0, p.spec};
    }
    if (auto sep = phrase.find(".."); sep != std::string::npos) {
      auto a = parse_date(std::string_view(phrase).substr(0, sep));
      auto b = parse_date(std::string_view(phrase).substr(sep + 2));
      if (a && b && *a <= *b) {
        return Choice{phrase, "between " + format_date(*a) + " and " + format_date(*b), 0.0,
                      range_spec(*a, *b)};
      }
    }
    if (auto spec = relative_period(phrase)) return Choice{phrase, phrase, 0.0, *spec};
    throw DomainExhausted("period '" + phrase + "' is not in the template library");
  }

  Choice draw_period(Rng& rng) const {
    const bool want_range = !ds_.daily.empty() && rng.uniform() < lib_.range_period_weight;
    if (want_range || lib_.periods.empty()) {
      const Date first = ds_.daily.front().date;
      const int span = static_cast<int>((ds_.today - first).count()) + 1;
      if (span >= 2) {
        const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(span - 1)));
        const int max_len = std::min(14, span - start);
        const int len = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len - 1)));
        const Date a = first + std::chrono::days{start};
        const Date b = a + std::chrono::days{len - 1};
        return period_choice(format_date(a) + ".." + format_date(b));
      }
    }
    if (lib_.periods.empty()) throw DomainExhausted("no periods available");
    return period_choice(lib_.periods[rng.below(lib_.periods.size())].phrase);
  }

  Choice draw_slot(const std::string& name, const SlotSpec& s, const std::map<std::string, Choice>& done,
                   Rng& rng) const {
    auto pinned = fixed_.find(name);
    if (s.domain == "periods") {
      return pinned != fixed_.end() ? period_choice(pinned->second) : draw_period(rng);
    }
    if (s.domain == "thresholds" || s.domain == "duration_thresholds") {
      std::vector<double> values;
      if (s.domain == "thresholds") {
        const MetricPhrasing& m = lib_.metrics.at(done.at(s.of).raw);
        values = grid(m.threshold_lo, m.threshold_hi, m.threshold_step);
      } else {
        values = grid(lib_.duration_lo, lib_.duration_hi, lib_.duration_step);
      }
      if (pinned != fixed_.end()) {
        double v = 0.0;
        const std::string& t = pinned->second;
        auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc{}) throw DomainExhausted("slot $" + name + " needs a number");
        return number_choice(v);
      }
      if (values.empty()) throw DomainExhausted("slot $" + name + " has an empty domain");
      return number_choice(values[rng.below(values.size())]);
    }
    std::vector<std::string> values = list_of(s, done);
    if (pinned != fixed_.end()) {
      if (std::find(values.begin(), values.end(), pinned->second) == values.end()) {
        throw DomainExhausted("slot $" + name + " cannot take '" + pinned->second + "' for user " +
                              ds_.user_id);
      }
      values = {pinned->second};
    }
    if (values.empty()) {
      throw DomainExhausted("slot $" + name + " (" + s.domain + ") is empty for user " + ds_.user_id);
    }
    const std::string& raw = values[rng.below(values.size())];
    return Choice{raw, phrase_for(s, raw), 0.0, {}};
  }

  const TemplateLibrary& lib_;
  const QueryTemplate& tpl_;
  const UserDataset& ds_;
  const SlotOverrides& fixed_;
  std::vector<std::string> present_;
};

QuerySemantics bind(const QueryTemplate& t, const std::map<std::string, Choice>& slots) {
  QuerySemantics q = t.semantics;
  for (const auto& [name, c] : slots) {
    const SlotSpec& s = t.slots.at(name);
    if (name == "METRIC") q.metric = c.raw;
    else if (name == "METRIC2") q.metric2 = c.raw;
    else if (name == "ACTIVITY") q.activity = c.raw;
    else if (name == "AGG") q.agg = c.raw;
    else if (s.domain == "periods") q.period = c.period;
    else if (s.domain == "thresholds" || s.domain == "duration_thresholds") q.number = c.number;
  }
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------
// Library

const QueryTemplate& TemplateLibrary::find(std::string_view id) const {
  for (const auto& t : templates) {
    if (t.id == id) return t;
  }
  throw ConfigError("unknown template '" + std::string(id) + "'");
}

TemplateLibrary TemplateLibrary::from_json(std::string_view text) {
  TemplateLibrary lib;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    template_error(e.what());
  }
  try {
    for (const auto& [name, m] : j.at("metrics").items()) {
      if (!find_daily_column(name)) template_error("unknown daily metric '" + name + "'");
      const auto g = read_grid(m.at("thresholds"), name + ".thresholds");
      lib.metrics[name] = MetricPhrasing{m.at("name").get<std::string>(), m.value("agg", ""), g[0], g[1], g[2]};
      lib.metric_order.push_back(name);
    }
    for (const auto& name : j.at("summable_metrics")) {
      if (!lib.metrics.count(name.get<std::string>())) {
        template_error("summable metric '" + name.get<std::string>() + "' is not listed in metrics");
      }
      lib.summable_metrics.push_back(name.get<std::string>());
    }
    for (const auto& [name, a] : j.at("activities").items()) {
      if (!is_activity_type(name)) template_error("unknown activity type '" + name + "'");
      lib.activities[name] = ActivityPhrasing{a.at("name"), a.at("plural"), a.at("gerund"), a.at("did")};
    }
    for (const auto& p : j.at("periods")) {
      const std::string phrase = p.at("phrase");
      auto spec = relative_period(phrase);
      if (!spec) template_error("period '" + phrase + "' is not a relative phrase");
      lib.periods.push_back(PeriodPhrase{phrase, p.at("text"), *spec});
    }
    lib.range_period_weight = j.value("range_period_weight", 0.0);
    if (lib.range_period_weight < 0 || lib.range_period_weight > 1) {
      template_error("range_period_weight must be in [0, 1]");
    }
    for (const auto& [method, word] : j.at("aggs").items()) {
      lib.aggs.emplace_back(method, word.get<std::string>());
    }
    const auto dg = read_grid(j.at("duration_thresholds"), "duration_thresholds");
    lib.duration_lo = dg[0];
    lib.duration_hi = dg[1];
    lib.duration_step = dg[2];

    std::set<std::string> ids;
    for (const auto& tj : j.at("templates")) {
      QueryTemplate t;
      t.id = tj.at("id");
      if (!ids.insert(t.id).second) template_error("duplicate template id '" + t.id + "'");
      t.category = tj.at("category");
      if (std::find(kCategories.begin(), kCategories.end(), t.category) == kCategories.end()) {
        template_error(t.id + ": unknown category '" + t.category + "'");
      }
      t.question_pattern = tj.at("question");
      t.program_pattern = tj.at("program");
      for (const auto& [name, sj] : tj.at("slots").items()) {
        SlotSpec s{sj.at("domain"), sj.value("form", ""), sj.value("of", ""), sj.value("distinct_from", "")};
        if (!kDomains.count(s.domain)) template_error(t.id + ": unknown domain '" + s.domain + "'");
        t.slots[name] = s;
      }
      for (const auto& [name, s] : t.slots) {
        if (s.domain == "thresholds" && !t.slots.count(s.of)) {
          template_error(t.id + ": $" + name + " thresholds need an 'of' metric slot");
        }
        if (!s.distinct_from.empty() && !t.slots.count(s.distinct_from)) {
          template_error(t.id + ": $" + name + " is distinct from an unknown slot");
        }
      }
      for (const auto& pattern : {t.question_pattern, t.program_pattern}) {
        for (const auto& name : slot_names(pattern)) {
          if (!t.slots.count(name)) template_error(t.id + ": pattern uses undeclared slot $" + name);
        }
      }
      const json& sem = tj.at("semantics");
      try {
        t.semantics.kind = parse_semantic_kind(sem.at("kind"));
      } catch (const std::invalid_argument& e) {
        template_error(t.id + ": " + e.what());
      }
      t.semantics.agg = sem.value("agg", "");
      t.semantics.field = sem.value("field", "");
      t.semantics.op = sem.value("op", "");
      t.semantics.filter_op = sem.value("filter_op", "");
      if (sem.contains("period")) {
        auto spec = relative_period(sem["period"].get<std::string>());
        if (!spec) template_error(t.id + ": unsupported fixed period");
        t.semantics.period = *spec;
        t.fixed_period = true;
      }
      lib.templates.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    template_error(e.what());
  }
  if (lib.templates.empty()) template_error("no templates");

  // Every program pattern must parse with representative slot values.
  for (const auto& t : lib.templates) {
    std::map<std::string, std::string> values;
    for (const auto& [name, s] : t.slots) {
      if (s.domain == "aggs") values[name] = lib.aggs.empty() ? "mean" : lib.aggs.front().first;
      else if (s.domain == "periods") values[name] = "last 7 days";
      else if (s.domain == "thresholds" || s.domain == "duration_thresholds") values[name] = "1";
      else if (s.domain == "activities" || s.domain == "present_activities") values[name] = "Run";
      else values[name] = lib.metric_order.empty() ? "steps" : lib.metric_order.front();
    }
    try {
      dsl::parse(substitute(t.program_pattern, values));
    } catch (const dsl::EvalError& e) {
      template_error(t.id + ": program pattern does not parse: " + e.what());
    }
  }
  return lib;
}

const TemplateLibrary& TemplateLibrary::defaults() {
  static const TemplateLibrary lib = from_json(resources::get("templates.json"));
  return lib;
}

// ---------------------------------------------------------------------------
// Instantiation

ObjectiveQuery instantiate(const TemplateLibrary& lib, const QueryTemplate& tpl, const UserDataset& ds,
                           Rng& rng, const SlotOverrides& fixed) {
  const Sampler sampler(lib, tpl, ds, fixed);
  std::optional<ObjectiveQuery> fallback;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const auto slots = sampler.draw(rng);
    std::map<std::string, std::string> raw, text;
    for (const auto& [name, c] : slots) {
      raw[name] = c.raw;
      text[name] = c.text;
    }
    ObjectiveQuery q;
    q.user_id = ds.user_id;
    q.category = tpl.category;
    q.template_id = tpl.id;
    q.question = substitute(tpl.question_pattern, text);
    q.gold_program = substitute(tpl.program_pattern, raw);
    q.semantics = bind(tpl, slots);
    const OracleAnswer ans = oracle_answer(q.semantics, ds);
    if (ans.state == OracleAnswer::State::number) {
      q.gold_answer = ans.value;
      return q;
    }
    if (ans.state == OracleAnswer::State::no_data && !fallback) {
      q.expect_no_data = true;
      fallback = std::move(q);
    }
  }
  if (fallback) return *fallback;
  throw DomainExhausted("template '" + tpl.id + "' yielded no answerable query for user " + ds.user_id);
}

std::vector<ObjectiveQuery> generate_benchmark(const std::vector<UserDataset>& users, int n_queries,
                                               std::uint64_t seed, const TemplateLibrary& lib) {
  if (n_queries < 1) throw ConfigError("benchmark: n_queries must be >= 1");
  if (users.empty()) throw ConfigError("benchmark: no users");
  const std::size_t n_tpl = lib.templates.size();
  const std::size_t n_users = users.size();
  const std::uint64_t max_steps = std::max<std::uint64_t>(1000, std::uint64_t(n_queries) * 50);

  std::vector<ObjectiveQuery> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::uint64_t step = 0; out.size() < std::size_t(n_queries); ++step) {
    if (step >= max_steps) {
      throw DomainExhausted("benchmark: only " + std::to_string(out.size()) + " distinct queries after " +
                            std::to_string(step) + " draws");
    }
    const QueryTemplate& tpl = lib.templates[step % n_tpl];
    const UserDataset& ds = users[(step / n_tpl) % n_users];
    Rng rng(mix_seed(seed, step));
    ObjectiveQuery q;
    try {
      q = instantiate(lib, tpl, ds, rng);
    } catch (const DomainExhausted&) {
      continue;
    }
    if (!seen.emplace(q.user_id, q.question).second) continue;
    char id[32];
    std::snprintf(id, sizeof id, "q%05zu", out.size() + 1);
    q.id = id;
    out.push_back(std::move(q));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSONL

std::string to_json_line(const ObjectiveQuery& q) {
  ordered_json j;
  j["id"] = q.id;
  j["user_id"] = q.user_id;
  j["category"] = q.category;
  j["question"] = q.question;
  j["gold_program"] = q.gold_program;
  if (q.gold_answer) j["gold_answer"] = *q.gold_answer;
  else j["gold_answer"] = std::string(dsl::kNoDataToken);
  j["expect_no_data"] = q.expect_no_data;
  return j.dump();
}

std::string to_jsonl(const std::vector<ObjectiveQuery>& queries) {
  std::string out;
  for (const auto& q : queries) out += to_json_line(q) + "\n";
  return out;
}

std::vector<ObjectiveQuery> parse_jsonl(std::string_view text) {
  std::vector<ObjectiveQuery> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      ObjectiveQuery q;
      q.id = j.at("id");
      q.user_id = j.at("user_id");
      q.category = j.at("category");
      q.question = j.at("question");
      q.gold_program = j.at("gold_program");
      const json& g = j.at("gold_answer");
      if (g.is_number()) q.gold_answer = g.get<double>();
      else if (!(g.is_string() && g.get<std::string>() == dsl::kNoDataToken)) {
        throw ParseError("gold_answer must be a number or \"NO_DATA\"");
      }
      q.expect_no_data = j.value("expect_no_data", false);
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw ParseError("benchmark line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("benchmark line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace insight::bench
