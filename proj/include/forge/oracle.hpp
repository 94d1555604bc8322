#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/semantic_cluster.hpp"

namespace forge {

/// Symmetric contradiction probabilities keyed by unordered statement-id
/// pairs. The diagonal is implicitly zero and never stored.
class ContradictionMatrix {
 public:
  using Key = std::pair<std::string, std::string>;  // first < second

  std::string model_tag = "unknown";
  std::string symmetrization = "mean";
  std::int64_t dim = 0;

  /// Throws CacheMiss when the pair is absent.
  double at(std::string_view a, std::string_view b) const;
  std::optional<double> find(std::string_view a, std::string_view b) const;
  bool contains(std::string_view a, std::string_view b) const { return find(a, b).has_value(); }

  /// Stores p for both orders. Rejects a == b and p outside [0, 1].
  void set(std::string_view a, std::string_view b, double p);

  std::size_t pair_count() const { return entries_.size(); }
  std::vector<std::string> statement_ids() const;
  const std::map<Key, double>& entries() const { return entries_; }

  static Key key(std::string_view a, std::string_view b);

 private:
  std::map<Key, double> entries_;
};

// Text cache format, byte-stable for a given set of pairs:
//   forge-contradiction-cache 1
//   model_tag <TAB> <tag>
//   symmetrization <TAB> mean
//   dim <TAB> <embedding dim, 0 if unknown>
//   pairs <TAB> <count>
//   <id_a> <TAB> <id_b> <TAB> <probability>     (sorted, id_a < id_b)
std::string cache_to_text(const ContradictionMatrix& m);
ContradictionMatrix cache_from_text(std::string_view text);
void write_cache(const ContradictionMatrix& m, const std::filesystem::path& path);
ContradictionMatrix read_cache(const std::filesystem::path& path);

enum class OracleBackend { CacheFile, Http };

struct OracleConfig {
  OracleBackend backend = OracleBackend::CacheFile;
  std::optional<std::string> endpoint;  // e.g. http://127.0.0.1:8080
  std::size_t batch_size = 32;
  int timeout_ms = 30000;
  int retries = 2;
  std::filesystem::path cache_path;            // contradiction cache
  std::filesystem::path embedding_cache_path;  // JSONL of {"text","values"}
  std::optional<std::string> token;            // sent as X-Forge-Token
};

/// Throws InvalidArgument unless endpoint is set exactly for the HTTP backend
/// and batch_size >= 1.
void validate(const OracleConfig& cfg);

/// Probabilities for one premise/hypothesis direction.
struct NliProbabilities {
  double entail = 0.0;
  double neutral = 0.0;
  double contradict = 0.0;
};

struct StatementPair {
  Statement a;
  Statement b;
};

/// Wire-level client for the model oracle service.
class OracleClient {
 public:
  explicit OracleClient(const OracleConfig& cfg);
  ~OracleClient();
  OracleClient(OracleClient&&) noexcept;
  OracleClient& operator=(OracleClient&&) noexcept;

  struct Health {
    std::string nli_model;
    std::string embed_model;
    std::int64_t dim = 0;
  };
  Health health();

  /// One request; returns (forward, backward) per pair in request order.
  std::vector<std::pair<NliProbabilities, NliProbabilities>> contradiction(
      std::span<const std::pair<std::string, std::string>> pairs, std::string* model_tag = nullptr);

  std::vector<Eigen::VectorXd> embed(std::span<const std::string> texts);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Uniform access to contradiction and embedding functions over either a
/// cache file or the HTTP service. HTTP answers are memoized in-process.
class OracleGateway {
 public:
  explicit OracleGateway(OracleConfig cfg);
  ~OracleGateway();

  /// Mean of both NLI directions; 0 for a statement against itself.
  double contradiction(const Statement& a, const Statement& b);

  /// One vector per text, order preserved.
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts);

  /// Fetches every missing pair in batches and writes the sorted cache to
  /// `out` after each batch. An existing `out` is loaded first, so an
  /// interrupted run resumes; on a failed batch the checkpoint is kept and
  /// PartialBatch is thrown.
  ContradictionMatrix precompute_cache(std::span<const StatementPair> pairs,
                                       const std::filesystem::path& out);

  const ContradictionMatrix& cache() const { return cache_; }

 private:
  OracleConfig cfg_;
  ContradictionMatrix cache_;
  std::map<std::string, Eigen::VectorXd> embeddings_;
  std::unique_ptr<OracleClient> client_;
};

/// Every cross-position statement pair inside each cluster, deduplicated and
/// sorted; the pairs the quintuplet optimizer can query.
std::vector<StatementPair> cluster_pairs(std::span<const SemanticCluster> clusters,
                                         std::span<const Statement> statements);

Json to_json(const StatementPair& p);
StatementPair statement_pair_from_json(const Json& obj, std::size_t line_no = 0);
std::vector<StatementPair> load_statement_pairs(const std::filesystem::path& path);

}  // namespace forge
