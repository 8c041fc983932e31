#pragma once

#include <insight/datamodel.hpp>
#include <insight/rng.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace insight::synth {

/// Marginal and dynamics of one autoregressive daily metric. The daily
/// value is
///   m_t = clip(mu(context) + std * x_t)
///   x_t = ar * x_{t-1} + sqrt(1 - ar^2) * (loading * f_t + sqrt(1 - loading^2) * e_t)
/// where f_t is the user's shared daily latent factor (unit-variance
/// AR(1) with coefficient `latent_ar`) and e_t is white noise, so x_t has
/// unit stationary variance. mu(context) shifts the configured mean
/// linearly in centred age and weight.
struct MetricSpec {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool integer = true;
  double ar = 0.0;       // [0, 1)
  double loading = 0.0;  // [-1, 1]
  double age_coef = 0.0;
  double weight_coef = 0.0;
};

struct TruncatedNormalSpec {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct ContextSpec {
  int age_min = 18;
  int age_max = 80;
  TruncatedNormalSpec weight_kg;
  TruncatedNormalSpec height_cm;
  std::array<double, 3> gender_weights{0.5, 0.5, 0.0};  // female, male, unspecified
  /// Latent-normal correlation over (age, weight, height).
  std::array<std::array<double, 3>, 3> correlation{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
};

struct ActivityTypeSpec {
  double weight = 0.0;
  double speed_mps = 0.0;  // 0 for activities without distance
  double speed_sd = 0.0;
  double kcal_per_min = 0.0;
  double avg_hr = 0.0;
  double steps_per_min = 0.0;
  double azm_fraction = 0.0;
  bool elevation = false;
};

struct ActivitySpec {
  double rate = 0.0;  // mean activities per day
  double duration_log_mean = 3.5;
  double duration_log_sd = 0.4;
  double min_duration = 5;
  double max_duration = 180;
  int start_minute_min = 360;
  int start_minute_max = 1200;
  std::map<std::string, ActivityTypeSpec, std::less<>> types;
};

/// Two-state Markov erasure: stationary missing rate `rate`, and
/// P(missing tomorrow | missing today) = `burst`.
struct MissingnessSpec {
  double rate = 0.0;
  double burst = 0.0;
};

inline constexpr std::array<std::string_view, 6> kMissingnessGroups = {
    "steps", "sleep", "resting_heart_rate", "heart_rate_variability", "active_zone",
    "stress_management_score"};

inline constexpr std::array<std::string_view, 7> kArMetrics = {
    "steps", "sleep_minutes", "awake_minutes", "resting_heart_rate",
    "heart_rate_variability", "active_zone_minutes", "stress_management_score"};

struct GeneratorConfig {
  int days = 31;
  Date today = make_date(2023, 10, 31);
  double latent_ar = 0.5;
  std::uint64_t seed = 0;
  ContextSpec context;
  std::map<std::string, MetricSpec, std::less<>> metrics;
  double deep_fraction = 0.16;
  double rem_fraction = 0.22;
  double stage_noise = 0.02;
  double wake_mean_minutes = 420;
  double wake_std_minutes = 45;
  double wake_min_minutes = 240;
  double wake_max_minutes = 690;
  double fatburn_fraction = 0.6;
  double cardio_fraction = 0.3;
  double zone_noise = 0.05;
  ActivitySpec activities;
  int min_step_days = 10;
  std::map<std::string, MissingnessSpec, std::less<>> missingness;

  /// Throws ConfigError describing the first broken invariant.
  void validate() const;

  static GeneratorConfig from_json(std::string_view text);
  /// The shipped default configuration (data/synth_default.json).
  static GeneratorConfig defaults();
};

struct CohortSpec {
  int n_users = 56;
  GeneratorConfig config;
};

/// Gaussian-copula draw of age, weight and height plus an independent
/// categorical gender.
DemographicContext sample_context(const GeneratorConfig& config, Rng& rng);

/// Complete (no missing cells) user with daily sequences and activities.
UserDataset generate_user(const GeneratorConfig& config, const std::string& user_id, Rng& rng);

/// Erases cells per missingness group; sleep columns are erased together.
/// At least min(min_step_days, days) days keep their step count.
UserDataset inject_missingness(UserDataset ds, const GeneratorConfig& config, Rng& rng);

/// generate_user followed by inject_missingness, using a per-user stream
/// derived from (config.seed, index).
UserDataset synthesize_user(const GeneratorConfig& config, int index);

std::string user_id_for(int index);

/// Users user_0001 .. user_NNNN, fully determined by config.seed.
std::vector<UserDataset> generate_cohort(const CohortSpec& spec);

/// Seeded sampling of `k` distinct ids without replacement.
std::vector<std::string> select_users(const std::vector<std::string>& ids, int k,
                                      std::uint64_t seed);

/// Writes one directory per user plus manifest.json; returns the manifest text.
std::string save_cohort(const std::vector<UserDataset>& cohort, const std::filesystem::path& dir);
std::vector<UserDataset> load_cohort(const std::filesystem::path& dir);

}  // namespace insight::synth
