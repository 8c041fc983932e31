#include <insight/synthgen.hpp>

#include <insight/resources.hpp>

#include <boost/math/distributions/normal.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace insight::synth {

using json = nlohmann::json;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  p = std::clamp(p, 1e-15, 1.0 - 1e-15);
  return boost::math::quantile(standard, p);
}

/// Inverse-CDF draw from N(mean, std) truncated to [min, max] at the
/// copula uniform `u`.
double truncated_normal(const TruncatedNormalSpec& s, double u) {
  if (s.std <= 0.0) return s.mean;
  const double a = normal_cdf((s.min - s.mean) / s.std);
  const double b = normal_cdf((s.max - s.mean) / s.std);
  return std::clamp(s.mean + s.std * normal_quantile(a + u * (b - a)), s.min, s.max);
}

/// Lower Cholesky factor; nullopt unless the matrix is positive definite.
std::optional<std::array<std::array<double, 3>, 3>> cholesky(
    const std::array<std::array<double, 3>, 3>& m) {
  std::array<std::array<double, 3>, 3> l{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = m[i][j];
      for (int k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (sum <= 1e-12) return std::nullopt;
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  return l;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

[[noreturn]] void config_error(const std::string& what) { throw ConfigError("generator config: " + what); }

void check_unit_interval(double v, const std::string& name, bool closed_top = false) {
  if (!(v >= 0.0) || (closed_top ? v > 1.0 : v >= 1.0)) {
    config_error(name + " must be in [0, 1" + (closed_top ? "]" : ")"));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void GeneratorConfig::validate() const {
  if (days < 1 || days > 31) config_error("days must be in [1, 31]");
  check_unit_interval(latent_ar, "latent_ar");
  if (context.age_min < 18 || context.age_max > 80 || context.age_min > context.age_max) {
    config_error("age range must lie within [18, 80]");
  }
  for (const auto* tn : {&context.weight_kg, &context.height_cm}) {
    if (tn->std < 0.0 || tn->min > tn->max || tn->mean < tn->min || tn->mean > tn->max) {
      config_error("weight/height marginals must satisfy min <= mean <= max and std >= 0");
    }
  }
  if (context.weight_kg.min <= 0.0) config_error("weight_kg.min must be positive");
  if (context.height_cm.min < 100.0 || context.height_cm.max > 230.0) {
    config_error("height_cm range must lie within [100, 230]");
  }
  double gsum = 0.0;
  for (double w : context.gender_weights) {
    if (w < 0.0) config_error("gender weights must be non-negative");
    gsum += w;
  }
  if (gsum <= 0.0) config_error("gender weights must not all be zero");
  const auto& c = context.correlation;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(c[i][i] - 1.0) > 1e-12) config_error("correlation diagonal must be 1");
    for (int j = 0; j < 3; ++j) {
      if (std::abs(c[i][j] - c[j][i]) > 1e-12) config_error("correlation must be symmetric");
    }
  }
  if (!cholesky(c)) config_error("correlation matrix is not positive definite");

  for (auto name : kArMetrics) {
    auto it = metrics.find(name);
    if (it == metrics.end()) config_error("missing metric spec '" + std::string(name) + "'");
    const MetricSpec& m = it->second;
    check_unit_interval(m.ar, std::string(name) + ".ar");
    if (m.loading < -1.0 || m.loading > 1.0) config_error(std::string(name) + ".loading must be in [-1, 1]");
    if (m.std < 0.0 || m.min > m.max) config_error(std::string(name) + " has an invalid marginal");
  }
  if (metrics.at("stress_management_score").min < 1 || metrics.at("stress_management_score").max > 100) {
    config_error("stress_management_score must be clipped within [1, 100]");
  }
  for (auto name : {"steps", "sleep_minutes", "awake_minutes", "active_zone_minutes",
                    "resting_heart_rate", "heart_rate_variability"}) {
    if (metrics.at(name).min < 0.0) config_error(std::string(name) + ".min must be >= 0");
  }
  if (deep_fraction < 0 || rem_fraction < 0 || deep_fraction + rem_fraction > 0.9) {
    config_error("sleep stage fractions must be non-negative and leave room for light sleep");
  }
  if (fatburn_fraction < 0 || cardio_fraction < 0 || fatburn_fraction + cardio_fraction > 1.0) {
    config_error("zone fractions must be non-negative and sum to at most 1");
  }
  if (wake_min_minutes < 0 || wake_max_minutes > 23 * 60 + 59 || wake_min_minutes > wake_max_minutes) {
    config_error("wake time bounds must lie within the day");
  }
  if (activities.rate < 0.0) config_error("activities.rate must be >= 0");
  if (activities.min_duration < 1 || activities.min_duration > activities.max_duration) {
    config_error("activity duration bounds are invalid");
  }
  if (activities.start_minute_min < 0 || activities.start_minute_min > activities.start_minute_max ||
      activities.start_minute_max + activities.max_duration > 24 * 60 - 1) {
    config_error("activity start window must keep activities within one day");
  }
  double wsum = 0.0;
  for (const auto& [name, t] : activities.types) {
    if (!is_activity_type(name)) config_error("unknown activity type '" + name + "'");
    if (t.weight < 0.0 || t.speed_mps < 0.0 || t.kcal_per_min < 0.0 || t.steps_per_min < 0.0) {
      config_error("activity type '" + name + "' has negative parameters");
    }
    check_unit_interval(t.azm_fraction, name + ".azm_fraction", true);
    wsum += t.weight;
  }
  if (activities.rate > 0.0 && wsum <= 0.0) config_error("activity type weights must not all be zero");

  for (auto group : kMissingnessGroups) {
    auto it = missingness.find(group);
    if (it == missingness.end()) continue;
    const MissingnessSpec& m = it->second;
    check_unit_interval(m.rate, "missingness." + std::string(group) + ".rate");
    check_unit_interval(m.burst, "missingness." + std::string(group) + ".burst");
    // P(miss | present) must be a probability for the stationary rate to hold.
    if (m.rate > 0.0 && m.rate * (1.0 - m.burst) / (1.0 - m.rate) > 1.0) {
      config_error("missingness." + std::string(group) +
                   ": rate is unreachable with this burst probability");
    }
  }
  if (min_step_days < 0) config_error("min_step_days must be >= 0");
  if (auto it = missingness.find("steps"); it != missingness.end() && days >= min_step_days &&
                                           days * (1.0 - it->second.rate) < min_step_days) {
    config_error("steps missingness rate leaves fewer than " + std::to_string(min_step_days) +
                 " days of step data");
  }
}

GeneratorConfig GeneratorConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  }
  GeneratorConfig c;
  try {
    c.days = j.value("days", c.days);
    if (j.contains("today")) {
      auto d = parse_date(j["today"].get<std::string>());
      if (!d) config_error("'today' must be YYYY-MM-DD");
      c.today = *d;
    }
    c.latent_ar = j.value("latent_ar", c.latent_ar);
    c.seed = j.value("seed", c.seed);

    const json& ctx = j.at("context");
    c.context.age_min = ctx.at("age").value("min", 18);
    c.context.age_max = ctx.at("age").value("max", 80);
    auto tn = [](const json& o) {
      return TruncatedNormalSpec{o.at("mean").get<double>(), o.at("std").get<double>(),
                                 o.at("min").get<double>(), o.at("max").get<double>()};
    };
    c.context.weight_kg = tn(ctx.at("weight_kg"));
    c.context.height_cm = tn(ctx.at("height_cm"));
    const json& gw = ctx.at("gender_weights");
    c.context.gender_weights = {gw.value("female", 0.0), gw.value("male", 0.0),
                                gw.value("unspecified", 0.0)};
    const json& corr = ctx.at("correlation");
    if (!corr.is_array() || corr.size() != 3) config_error("correlation must be 3x3");
    for (int r = 0; r < 3; ++r) {
      if (!corr[r].is_array() || corr[r].size() != 3) config_error("correlation must be 3x3");
      for (int col = 0; col < 3; ++col) c.context.correlation[r][col] = corr[r][col].get<double>();
    }

    for (const auto& [name, m] : j.at("metrics").items()) {
      MetricSpec s;
      s.mean = m.at("mean").get<double>();
      s.std = m.at("std").get<double>();
      s.min = m.at("min").get<double>();
      s.max = m.at("max").get<double>();
      s.integer = m.value("integer", true);
      s.ar = m.value("ar", 0.0);
      s.loading = m.value("loading", 0.0);
      s.age_coef = m.value("age_coef", 0.0);
      s.weight_coef = m.value("weight_coef", 0.0);
      c.metrics[name] = s;
    }

    const json& st = j.at("sleep_stages");
    c.deep_fraction = st.at("deep_fraction").get<double>();
    c.rem_fraction = st.at("rem_fraction").get<double>();
    c.stage_noise = st.value("noise", 0.0);
    const json& wk = j.at("wake_time");
    c.wake_mean_minutes = wk.at("mean_minutes").get<double>();
    c.wake_std_minutes = wk.value("std_minutes", 0.0);
    c.wake_min_minutes = wk.value("min_minutes", 240.0);
    c.wake_max_minutes = wk.value("max_minutes", 690.0);
    const json& zn = j.at("zones");
    c.fatburn_fraction = zn.at("fatburn_fraction").get<double>();
    c.cardio_fraction = zn.at("cardio_fraction").get<double>();
    c.zone_noise = zn.value("noise", 0.0);

    const json& act = j.at("activities");
    c.activities.rate = act.at("rate").get<double>();
    c.activities.duration_log_mean = act.at("duration_log_mean").get<double>();
    c.activities.duration_log_sd = act.at("duration_log_sd").get<double>();
    c.activities.min_duration = act.value("min_duration", 5.0);
    c.activities.max_duration = act.value("max_duration", 180.0);
    c.activities.start_minute_min = act.value("start_minute_min", 360);
    c.activities.start_minute_max = act.value("start_minute_max", 1200);
    for (const auto& [name, t] : act.at("types").items()) {
      ActivityTypeSpec s;
      s.weight = t.value("weight", 0.0);
      s.speed_mps = t.value("speed_mps", 0.0);
      s.speed_sd = t.value("speed_sd", 0.0);
      s.kcal_per_min = t.value("kcal_per_min", 0.0);
      s.avg_hr = t.value("avg_hr", 120.0);
      s.steps_per_min = t.value("steps_per_min", 0.0);
      s.azm_fraction = t.value("azm_fraction", 0.0);
      s.elevation = t.value("elevation", false);
      c.activities.types[name] = s;
    }

    const json& miss = j.at("missingness");
    c.min_step_days = miss.value("min_step_days", 10);
    for (const auto& [name, m] : miss.at("groups").items()) {
      bool known = std::find(kMissingnessGroups.begin(), kMissingnessGroups.end(), name) !=
                   kMissingnessGroups.end();
      if (!known) config_error("unknown missingness group '" + name + "'");
      c.missingness[name] = MissingnessSpec{m.value("rate", 0.0), m.value("burst", 0.0)};
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  }
  c.validate();
  return c;
}

GeneratorConfig GeneratorConfig::defaults() {
  return from_json(resources::get("synth_default.json"));
}

// ---------------------------------------------------------------------------
// Sampling

DemographicContext sample_context(const GeneratorConfig& config, Rng& rng) {
  const auto chol = cholesky(config.context.correlation);
  if (!chol) throw ConfigError("generator config: correlation matrix is not positive definite");
  const std::array<double, 3> n{rng.normal(), rng.normal(), rng.normal()};
  std::array<double, 3> z{};
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k <= i; ++k) z[i] += (*chol)[i][k] * n[k];
  }
  const auto& cs = config.context;
  DemographicContext ctx;
  // Discrete uniform over the age range by quantile of the latent normal.
  const int span = cs.age_max - cs.age_min + 1;
  const int offset = std::min(span - 1, static_cast<int>(std::floor(normal_cdf(z[0]) * span)));
  ctx.age = std::clamp(cs.age_min + offset, 18, 80);
  ctx.weight_kg = std::round(truncated_normal(cs.weight_kg, normal_cdf(z[1])) * 10.0) / 10.0;
  ctx.height_cm = std::round(truncated_normal(cs.height_cm, normal_cdf(z[2])) * 10.0) / 10.0;

  const double total = cs.gender_weights[0] + cs.gender_weights[1] + cs.gender_weights[2];
  const double u = rng.uniform() * total;
  if (u < cs.gender_weights[0]) ctx.gender = Gender::female;
  else if (u < cs.gender_weights[0] + cs.gender_weights[1]) ctx.gender = Gender::male;
  else ctx.gender = Gender::unspecified;
  return ctx;
}

namespace {

/// Context-adjusted mean of a metric.
double metric_mean(const MetricSpec& m, const GeneratorConfig& c, const DemographicContext& ctx) {
  const double age_centre = 0.5 * (c.context.age_min + c.context.age_max);
  return m.mean + m.age_coef * (ctx.age - age_centre) +
         m.weight_coef * (ctx.weight_kg - c.context.weight_kg.mean);
}

const std::string& pick_activity(const ActivitySpec& spec, Rng& rng) {
  double total = 0.0;
  for (const auto& [_, t] : spec.types) total += t.weight;
  double u = rng.uniform() * total;
  for (const auto& [name, t] : spec.types) {
    if (u < t.weight) return name;
    u -= t.weight;
  }
  return std::prev(spec.types.end())->first;
}

ActivityRecord make_activity(const GeneratorConfig& c, const DemographicContext& ctx, Date day,
                             int start_minute, const std::string& name, Rng& rng) {
  const ActivityTypeSpec& t = c.activities.types.at(name);
  const auto& as = c.activities;
  double duration = std::round(std::clamp(rng.lognormal(as.duration_log_mean, as.duration_log_sd),
                                          as.min_duration, as.max_duration));
  ActivityRecord a;
  a.activity_name = name;
  a.start_time = at_time(day, start_minute / 60, start_minute % 60);
  a.duration = duration;
  a.end_time = a.start_time + std::chrono::minutes{static_cast<int>(duration)};
  if (t.speed_mps > 0.0) {
    const double speed = std::max(0.3, rng.normal(t.speed_mps, t.speed_sd));
    const double distance = std::round(speed * duration * 60.0);
    a.distance = distance;
    a.speed = round2(distance / (duration * 60.0));
    if (t.elevation) a.elevation_gain = std::round(std::max(0.0, distance / 1000.0 * rng.normal(8.0, 3.0)));
  }
  a.average_heart_rate = std::round(std::clamp(rng.normal(t.avg_hr, 8.0), 60.0, 200.0));
  a.calories = std::round(std::max(0.0, duration * t.kcal_per_min * (ctx.weight_kg / 70.0) *
                                            rng.normal(1.0, 0.1)));
  if (t.steps_per_min > 0.0) {
    a.steps = std::round(std::max(0.0, duration * t.steps_per_min * rng.normal(1.0, 0.08)));
  }
  a.active_zone_minutes =
      std::round(std::clamp(duration * t.azm_fraction * rng.normal(1.0, 0.1), 0.0, duration));
  return a;
}

}  // namespace

UserDataset generate_user(const GeneratorConfig& config, const std::string& user_id, Rng& rng) {
  config.validate();
  UserDataset ds;
  ds.user_id = user_id;
  ds.today = config.today;
  ds.context = sample_context(config, rng);

  struct State {
    const MetricSpec* spec;
    double mean;
    double x;
  };
  std::map<std::string_view, State> state;
  for (auto name : kArMetrics) {
    const MetricSpec& m = config.metrics.find(name)->second;
    state[name] = State{&m, metric_mean(m, config, ds.context), rng.normal()};
  }
  double factor = rng.normal();
  const double factor_innov = std::sqrt(1.0 - config.latent_ar * config.latent_ar);

  auto draw = [&](std::string_view name) {
    State& s = state[name];
    const MetricSpec& m = *s.spec;
    const double shared = m.loading * factor;
    const double own = std::sqrt(1.0 - m.loading * m.loading) * rng.normal();
    s.x = m.ar * s.x + std::sqrt(1.0 - m.ar * m.ar) * (shared + own);
    double v = std::clamp(s.mean + m.std * s.x, m.min, m.max);
    return m.integer ? std::round(v) : round2(v);
  };

  const Date first = config.today - std::chrono::days{config.days - 1};
  for (int d = 0; d < config.days; ++d) {
    const Date day = first + std::chrono::days{d};
    factor = config.latent_ar * factor + factor_innov * rng.normal();

    DailyRecord r;
    r.date = day;
    r.steps = draw("steps");
    const double sleep = draw("sleep_minutes");
    const double awake = draw("awake_minutes");
    r.resting_heart_rate = draw("resting_heart_rate");
    r.heart_rate_variability = draw("heart_rate_variability");
    const double azm = draw("active_zone_minutes");
    r.stress_management_score = draw("stress_management_score");

    // Sleep stages: deep and REM as noisy fractions, light takes the rest.
    const double deep_f = std::clamp(rng.normal(config.deep_fraction, config.stage_noise), 0.02, 0.45);
    const double rem_f = std::clamp(rng.normal(config.rem_fraction, config.stage_noise), 0.02, 0.45);
    const double deep = std::round(sleep * deep_f);
    const double rem = std::round(sleep * rem_f);
    r.sleep_minutes = sleep;
    r.awake_minutes = awake;
    r.deep_sleep_minutes = deep;
    r.rem_sleep_minutes = rem;
    r.light_sleep_minutes = sleep - deep - rem;
    const double period = sleep + awake;
    r.deep_sleep_percent = round2(deep / period * 100.0);
    r.rem_sleep_percent = round2(rem / period * 100.0);
    r.light_sleep_percent = round2((sleep - deep - rem) / period * 100.0);
    r.awake_percent = round2(awake / period * 100.0);

    const double wake = std::round(std::clamp(rng.normal(config.wake_mean_minutes, config.wake_std_minutes),
                                              config.wake_min_minutes, config.wake_max_minutes));
    r.wake_up_time = at_time(day, static_cast<int>(wake) / 60, static_cast<int>(wake) % 60);
    r.bed_time = *r.wake_up_time - std::chrono::minutes{static_cast<int>(period)};

    // Zone split: fat burn and cardio as noisy fractions, peak takes the rest.
    const double fb_f = std::clamp(rng.normal(config.fatburn_fraction, config.zone_noise), 0.0, 1.0);
    const double ca_f = std::clamp(rng.normal(config.cardio_fraction, config.zone_noise), 0.0, 1.0 - fb_f);
    double fatburn = std::round(azm * fb_f);
    double cardio = std::min(std::round(azm * ca_f), azm - fatburn);
    r.active_zone_minutes = azm;
    r.fatburn_active_zone_minutes = fatburn;
    r.cardio_active_zone_minutes = cardio;
    r.peak_active_zone_minutes = azm - fatburn - cardio;

    ds.daily.push_back(r);

    const int n_act = config.activities.types.empty() ? 0 : rng.poisson(config.activities.rate);
    std::vector<ActivityRecord> todays;
    for (int k = 0; k < n_act; ++k) {
      const int start = config.activities.start_minute_min +
                        static_cast<int>(rng.below(static_cast<std::uint64_t>(
                            config.activities.start_minute_max - config.activities.start_minute_min + 1)));
      const std::string& name = pick_activity(config.activities, rng);
      todays.push_back(make_activity(config, ds.context, day, start, name, rng));
    }
    std::stable_sort(todays.begin(), todays.end(),
                     [](const auto& a, const auto& b) { return a.start_time < b.start_time; });
    ds.activities.insert(ds.activities.end(), todays.begin(), todays.end());
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Missingness

namespace {

std::vector<bool> markov_mask(int n, const MissingnessSpec& m, Rng& rng) {
  std::vector<bool> miss(static_cast<std::size_t>(n), false);
  if (m.rate <= 0.0) return miss;
  const double enter = m.rate * (1.0 - m.burst) / (1.0 - m.rate);
  bool state = rng.bernoulli(m.rate);
  for (int i = 0; i < n; ++i) {
    if (i > 0) state = state ? rng.bernoulli(m.burst) : rng.bernoulli(enter);
    miss[static_cast<std::size_t>(i)] = state;
  }
  return miss;
}

void erase_group(DailyRecord& r, std::string_view group) {
  if (group == "steps") {
    r.steps.reset();
  } else if (group == "sleep") {
    r.sleep_minutes.reset();
    r.bed_time.reset();
    r.wake_up_time.reset();
    r.deep_sleep_minutes.reset();
    r.rem_sleep_minutes.reset();
    r.light_sleep_minutes.reset();
    r.awake_minutes.reset();
    r.deep_sleep_percent.reset();
    r.rem_sleep_percent.reset();
    r.light_sleep_percent.reset();
    r.awake_percent.reset();
  } else if (group == "resting_heart_rate") {
    r.resting_heart_rate.reset();
  } else if (group == "heart_rate_variability") {
    r.heart_rate_variability.reset();
  } else if (group == "active_zone") {
    r.active_zone_minutes.reset();
    r.fatburn_active_zone_minutes.reset();
    r.cardio_active_zone_minutes.reset();
    r.peak_active_zone_minutes.reset();
  } else if (group == "stress_management_score") {
    r.stress_management_score.reset();
  }
}

}  // namespace

UserDataset inject_missingness(UserDataset ds, const GeneratorConfig& config, Rng& rng) {
  config.validate();
  const int n = static_cast<int>(ds.daily.size());
  for (auto group : kMissingnessGroups) {
    auto it = config.missingness.find(group);
    if (it == config.missingness.end()) continue;
    std::vector<bool> mask = markov_mask(n, it->second, rng);
    if (group == "steps") {
      // Restore random erased cells until the floor of step days holds.
      const int floor_days = std::min(config.min_step_days, n);
      std::vector<std::size_t> erased;
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] && ds.daily[i].steps) erased.push_back(i);
      }
      int present = 0;
      for (std::size_t i = 0; i < mask.size(); ++i) present += (!mask[i] && ds.daily[i].steps) ? 1 : 0;
      while (present < floor_days && !erased.empty()) {
        const std::size_t pick = static_cast<std::size_t>(rng.below(erased.size()));
        mask[erased[pick]] = false;
        erased.erase(erased.begin() + static_cast<std::ptrdiff_t>(pick));
        ++present;
      }
    }
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) erase_group(ds.daily[i], group);
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Cohorts

std::string user_id_for(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "user_%04d", index + 1);
  return buf;
}

UserDataset synthesize_user(const GeneratorConfig& config, int index) {
  Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(index)));
  UserDataset ds = generate_user(config, user_id_for(index), rng);
  return inject_missingness(std::move(ds), config, rng);
}

std::vector<UserDataset> generate_cohort(const CohortSpec& spec) {
  if (spec.n_users < 1) throw ConfigError("cohort: n_users must be >= 1");
  spec.config.validate();
  std::vector<UserDataset> out;
  out.reserve(static_cast<std::size_t>(spec.n_users));
  for (int i = 0; i < spec.n_users; ++i) out.push_back(synthesize_user(spec.config, i));
  return out;
}

std::vector<std::string> select_users(const std::vector<std::string>& ids, int k, std::uint64_t seed) {
  if (k < 0 || static_cast<std::size_t>(k) > ids.size()) {
    throw ConfigError("cannot select " + std::to_string(k) + " of " + std::to_string(ids.size()) + " users");
  }
  std::vector<std::string> pool = ids;
  Rng rng(mix_seed(seed, 0x5e1ec7));
  // Partial Fisher-Yates.
  for (int i = 0; i < k; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

std::string save_cohort(const std::vector<UserDataset>& cohort, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["users"] = json::array();
  for (const auto& ds : cohort) {
    save_user_dir(ds, dir / ds.user_id);
    manifest["users"].push_back({{"user_id", ds.user_id},
                                 {"days", ds.daily.size()},
                                 {"activities", ds.activities.size()},
                                 {"today", format_date(ds.today)}});
  }
  const std::string text = manifest.dump(2) + "\n";
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write manifest in '" + dir.string() + "'");
  out << text;
  return text;
}

std::vector<UserDataset> load_cohort(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError("cohort directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> users;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "context.json")) {
      users.push_back(entry.path());
    }
  }
  std::sort(users.begin(), users.end());
  if (users.empty()) throw ParseError("cohort directory '" + dir.string() + "' holds no users");
  std::vector<UserDataset> out;
  for (const auto& p : users) out.push_back(load_user_dir(p));
  return out;
}

}  // namespace insight::synth
