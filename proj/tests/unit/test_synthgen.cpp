#include <doctest.h>

#include "../support.hpp"

#include <insight/synthgen.hpp>

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

using namespace insight;
using namespace insight::synth;

namespace {

/// Average ranks (1-based), ties share their mean rank.
std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * (i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("default config is valid") {
  auto cfg = GeneratorConfig::defaults();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.days == 31);
  CHECK(cfg.metrics.at("steps").ar == doctest::Approx(0.6));
}

TEST_CASE("degenerate marginals give the exact context") {
  auto cfg = GeneratorConfig::defaults();
  cfg.context.age_min = cfg.context.age_max = 40;
  cfg.context.weight_kg = {70, 0, 70, 70};
  cfg.context.height_cm = {170, 0, 170, 170};
  cfg.context.correlation = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    auto ctx = sample_context(cfg, rng);
    CHECK(ctx.age == 40);
    CHECK(ctx.weight_kg == 70);
    CHECK(ctx.height_cm == 170);
  }
}

TEST_CASE("context sampling is deterministic under a seed") {
  auto cfg = GeneratorConfig::defaults();
  Rng a(42), b(42);
  CHECK(sample_context(cfg, a) == sample_context(cfg, b));
}

TEST_CASE("copula correlation shows up in the normal scores") {
  auto cfg = GeneratorConfig::defaults();
  cfg.context.correlation = {{{1, 0, 0}, {0, 1, 0.6}, {0, 0.6, 1}}};
  Rng rng(7);
  std::vector<double> w, h;
  for (int i = 0; i < 10000; ++i) {
    auto ctx = sample_context(cfg, rng);
    w.push_back(ctx.weight_kg);
    h.push_back(*ctx.height_cm);
  }
  // Normal scores of the ranks recover the latent correlation.
  const boost::math::normal_distribution<> std_normal;
  auto scores = [&](const std::vector<double>& x) {
    auto r = ranks(x);
    for (double& v : r) v = boost::math::quantile(std_normal, v / (x.size() + 1.0));
    return r;
  };
  const double rho = pearson(scores(w), scores(h));
  CHECK(rho == doctest::Approx(0.6).epsilon(0.05 / 0.6));
}

TEST_CASE("a non positive definite correlation is rejected") {
  auto cfg = GeneratorConfig::defaults();
  cfg.context.correlation = {{{1, 0.9, 0.9}, {0.9, 1, -0.9}, {0.9, -0.9, 1}}};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  Rng rng(1);
  CHECK_THROWS_AS(sample_context(cfg, rng), ConfigError);
}

TEST_CASE("config ranges are checked") {
  auto cfg = GeneratorConfig::defaults();
  SUBCASE("days") {
    cfg.days = 32;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.days = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("ar coefficient") {
    cfg.metrics["steps"].ar = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("steps erased so often that the floor cannot hold") {
    cfg.missingness["steps"].rate = 0.9;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("steps never present") {
    cfg.missingness["steps"].rate = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("one-day users") {
  auto cfg = GeneratorConfig::defaults();
  cfg.days = 1;
  cfg.activities.rate = 3;
  for (int i = 0; i < 5; ++i) {
    auto ds = synthesize_user(cfg, i);
    REQUIRE(ds.daily.size() == 1);
    CHECK(ds.daily[0].date == ds.today);
    for (const auto& a : ds.activities) CHECK(a.date() == ds.today);
    CHECK(validate_dataset(ds).empty());
  }
}

TEST_CASE("generated users validate over many seeds") {
  auto cfg = GeneratorConfig::defaults();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    for (int i = 0; i < 8; ++i) {
      auto ds = synthesize_user(cfg, i);
      auto v = validate_dataset(ds);
      CHECK_MESSAGE(v.empty(), ds.user_id << " seed " << seed << ": " << (v.empty() ? "" : to_string(v[0])));
      int step_days = 0;
      for (const auto& r : ds.daily) step_days += r.steps.has_value();
      CHECK(step_days >= cfg.min_step_days);
    }
  }
}

TEST_CASE("complete users have every cell and derived columns add up") {
  auto cfg = GeneratorConfig::defaults();
  Rng rng(3);
  auto ds = generate_user(cfg, "u", rng);
  for (const auto& r : ds.daily) {
    REQUIRE(r.steps);
    REQUIRE(r.sleep_minutes);
    REQUIRE(r.deep_sleep_minutes);
    CHECK(std::abs(*r.deep_sleep_minutes + *r.rem_sleep_minutes + *r.light_sleep_minutes - *r.sleep_minutes) <= 1);
    CHECK(std::abs(*r.deep_sleep_percent + *r.rem_sleep_percent + *r.light_sleep_percent + *r.awake_percent - 100) <=
          0.5);
  }
}

TEST_CASE("missingness") {
  auto cfg = GeneratorConfig::defaults();
  Rng rng(11);
  auto complete = generate_user(cfg, "u", rng);

  SUBCASE("zero rates change nothing") {
    for (auto& [name, m] : cfg.missingness) m.rate = 0;
    Rng r2(5);
    CHECK(inject_missingness(complete, cfg, r2) == complete);
  }
  SUBCASE("sleep columns go missing together and dates never do") {
    Rng r2(5);
    auto ds = inject_missingness(complete, cfg, r2);
    REQUIRE(ds.daily.size() == complete.daily.size());
    for (std::size_t i = 0; i < ds.daily.size(); ++i) {
      const auto& r = ds.daily[i];
      CHECK(r.date == complete.daily[i].date);
      const bool s = r.sleep_minutes.has_value();
      CHECK(r.deep_sleep_minutes.has_value() == s);
      CHECK(r.awake_percent.has_value() == s);
      CHECK(r.bed_time.has_value() == s);
    }
  }
}

TEST_CASE("lag-1 autocorrelation of steps is positive on average") {
  auto cfg = GeneratorConfig::defaults();
  double total = 0;
  const int users = 56;
  for (int i = 0; i < users; ++i) {
    Rng rng(mix_seed(99, i));
    auto ds = generate_user(cfg, user_id_for(i), rng);
    std::vector<double> a, b;
    for (std::size_t t = 1; t < ds.daily.size(); ++t) {
      a.push_back(*ds.daily[t - 1].steps);
      b.push_back(*ds.daily[t].steps);
    }
    total += pearson(a, b);
  }
  CHECK(total / users > 0.2);
}

TEST_CASE("cohorts") {
  CohortSpec spec;
  spec.n_users = 1;
  spec.config = GeneratorConfig::defaults();
  auto one = generate_cohort(spec);
  REQUIRE(one.size() == 1);
  CHECK(one[0].user_id == "user_0001");

  spec.n_users = 0;
  CHECK_THROWS_AS(generate_cohort(spec), ConfigError);

  spec.n_users = 56;
  spec.config.seed = 7;
  auto cohort = generate_cohort(spec);
  REQUIRE(cohort.size() == 56);
  CHECK(cohort.back().user_id == "user_0056");

  std::vector<std::string> ids;
  for (const auto& u : cohort) ids.push_back(u.user_id);
  auto picked = select_users(ids, 4, 3);
  CHECK(picked.size() == 4);
  CHECK(std::set<std::string>(picked.begin(), picked.end()).size() == 4);
  CHECK(select_users(ids, 4, 3) == picked);
  CHECK_THROWS_AS(select_users(ids, 57, 3), ConfigError);

  testing::TempDir a, b;
  const auto manifest = save_cohort(cohort, a.path);
  CHECK(save_cohort(generate_cohort(spec), b.path) == manifest);
  for (const auto& u : {"user_0001", "user_0030", "user_0056"}) {
    for (const auto& f : {"daily.csv", "activities.csv", "context.json"}) {
      CHECK(slurp(a.path / u / f) == slurp(b.path / u / f));
    }
  }
  CHECK(load_cohort(a.path) == cohort);
}
