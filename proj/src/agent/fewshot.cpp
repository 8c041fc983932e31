#include <insight/agent/fewshot.hpp>

#include <insight/http_client.hpp>
#include <insight/resources.hpp>
#include <insight/retrieval.hpp>
#include <insight/rng.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace insight::agent {

using json = nlohmann::json;

namespace {

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  if (n <= 0.0) return;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::size_t nearest(const std::vector<std::vector<double>>& centroids, const std::vector<double>& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = sq_dist(centroids[c], p);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::vector<double> HashEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dim_, 0.0);
  for (const auto& t : retrieval::tokenize(text)) v[fnv1a(t) % dim_] += 1.0;
  normalize(v);
  return v;
}

std::vector<double> RemoteEmbedder::embed(std::string_view text) const {
  json body{{"input", std::string(text)}};
  if (!model_.empty()) body["model"] = model_;
  http::Headers headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
  const http::Response r = http::post_json(url_, body.dump(), headers);
  if (r.status != 200) throw http::TransportError("embedding endpoint returned HTTP " + std::to_string(r.status));
  std::vector<double> v;
  try {
    const json j = json::parse(r.body);
    const json& e = j.contains("embedding") ? j["embedding"] : j.at("data").at(0).at("embedding");
    v = e.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw http::TransportError(std::string("malformed embedding response: ") + e.what());
  }
  normalize(v);
  return v;
}

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed) {
  KMeansResult res;
  const std::size_t n = points.size();
  if (k == 0 || n == 0) return res;
  if (k > n) throw InsufficientPool("k-means needs at least k points");
  Rng rng(seed);

  // k-means++ seeding.
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  res.centroids.push_back(points[first]);
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], points[first]);
  while (res.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] <= 0.0) continue;
        pick = i;
        r -= d2[i];
        if (r < 0.0) break;
      }
    }
    if (pick == n) {
      // Every remaining point coincides with a centroid.
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = true;
    res.centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], points[pick]));
  }

  const std::size_t dim = points[0].size();
  res.assignment.assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) res.assignment[i] = nearest(res.centroids, points[i]);
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[res.assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
      ++counts[res.assignment[i]];
    }
    double moved = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (double& x : sums[c]) x /= double(counts[c]);
      moved = std::max(moved, std::sqrt(sq_dist(sums[c], res.centroids[c])));
      res.centroids[c] = std::move(sums[c]);
    }
    res.iterations = iter + 1;
    if (moved < 1e-6) break;
  }
  for (std::size_t i = 0; i < n; ++i) res.assignment[i] = nearest(res.centroids, points[i]);
  return res;
}

std::vector<std::size_t> select_representatives(const std::vector<std::vector<double>>& points, std::size_t k,
                                                std::uint64_t seed) {
  if (points.size() < k) {
    throw InsufficientPool("few-shot pool has " + std::to_string(points.size()) + " examples, need " +
                           std::to_string(k));
  }
  if (k == 0) return {};
  const KMeansResult km = kmeans(points, k, seed);
  std::vector<bool> taken(points.size(), false);
  std::vector<std::size_t> out;
  std::vector<std::size_t> empty;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t best = points.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (km.assignment[i] != c) continue;
      const double d = sq_dist(points[i], km.centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best == points.size()) {
      empty.push_back(c);
      continue;
    }
    taken[best] = true;
    out.push_back(best);
  }
  for (std::size_t c : empty) {
    std::size_t best = points.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i]) continue;
      const double d = sq_dist(points[i], km.centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    taken[best] = true;
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<FewShotExample> select_few_shots(const std::vector<FewShotExample>& pool, std::size_t k,
                                             const Embedder& embedder, std::uint64_t seed) {
  std::vector<std::vector<double>> points;
  points.reserve(pool.size());
  for (const auto& ex : pool) points.push_back(embedder.embed(ex.query));
  std::vector<FewShotExample> out;
  for (std::size_t i : select_representatives(points, k, seed)) out.push_back(pool[i]);
  return out;
}

std::vector<FewShotExample> parse_pool_jsonl(std::string_view text) {
  std::vector<FewShotExample> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "pool line " + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      FewShotExample ex;
      ex.query = j.at("query").get<std::string>();
      for (const auto& s : j.at("trajectory")) {
        TraceStep step;
        step.seq = static_cast<int>(ex.trajectory.size());
        auto kind = parse_step_kind(s.at("kind").get<std::string>());
        if (!kind) throw ParseError(where + ": unknown step kind");
        step.kind = *kind;
        if (s.contains("tool")) {
          step.tool = parse_tool(s["tool"].get<std::string>());
          if (!step.tool) throw ParseError(where + ": unknown tool");
        }
        step.content = s.at("content").get<std::string>();
        step.ok = s.value("ok", true);
        ex.trajectory.push_back(std::move(step));
      }
      if (auto bad = check_trace(ex.trajectory); !bad.empty()) throw ParseError(where + ": " + bad.front());
      if (ex.trajectory.empty() || ex.trajectory.back().kind != StepKind::finish) {
        throw ParseError(where + ": trajectory must end with a finish step");
      }
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

const std::vector<FewShotExample>& agent_pool() {
  static const auto pool = parse_pool_jsonl(resources::get("fewshots/agent_pool.jsonl"));
  return pool;
}

const std::vector<FewShotExample>& codegen_pool() {
  static const auto pool = parse_pool_jsonl(resources::get("fewshots/codegen_pool.jsonl"));
  return pool;
}

const std::vector<FewShotExample>& numeric_pool() {
  static const auto pool = parse_pool_jsonl(resources::get("fewshots/numeric_pool.jsonl"));
  return pool;
}

}  // namespace insight::agent
