#pragma once

#include <insight/agent/trace.hpp>
#include <insight/errors.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace insight::agent {

struct FewShotExample {
  std::string query;
  Trace trajectory;

  friend bool operator==(const FewShotExample&, const FewShotExample&) = default;
};

class InsufficientPool : public Error {
 public:
  using Error::Error;
};

/// Maps text to a fixed-dimension unit vector (or the zero vector for
/// text with no tokens).
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

/// Token-hash term frequencies folded into `dim` buckets, L2-normalized.
class HashEmbedder : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 256) : dim_(dim) {}
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dim_;
};

/// POST {"input": text} to a URL returning {"embedding": [...]} (or an
/// OpenAI-style data[0].embedding); the result is L2-normalized.
class RemoteEmbedder : public Embedder {
 public:
  RemoteEmbedder(std::string url, std::string api_key, std::string model)
      : url_(std::move(url)), api_key_(std::move(api_key)), model_(std::move(model)) {}
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::string url_, api_key_, model_;
};

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;
  int iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeding; stops after 100 iterations
/// or when no centroid moves more than 1e-6. Assignment ties go to the
/// lower centroid index; an emptied cluster keeps its previous centroid.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed);

/// Per cluster, the index of the point nearest its centroid (lowest index
/// on ties), in ascending order. A cluster left empty takes the nearest
/// point not already chosen.
std::vector<std::size_t> select_representatives(const std::vector<std::vector<double>>& points, std::size_t k,
                                                std::uint64_t seed);

/// Throws InsufficientPool when the pool has fewer than k examples.
std::vector<FewShotExample> select_few_shots(const std::vector<FewShotExample>& pool, std::size_t k,
                                             const Embedder& embedder, std::uint64_t seed);

/// Pool JSONL: {"query", "trajectory": [{"kind", "tool"?, "content", "ok"?}]}.
/// Step numbers are assigned in order. Throws ParseError.
std::vector<FewShotExample> parse_pool_jsonl(std::string_view text);

const std::vector<FewShotExample>& agent_pool();
const std::vector<FewShotExample>& codegen_pool();
const std::vector<FewShotExample>& numeric_pool();

}  // namespace insight::agent
