#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forge/corpus.hpp"
#include "forge/position.hpp"

namespace forge {

struct EmbeddingVector {
  std::string statement_id;
  Eigen::VectorXd values;

  Eigen::Index dim() const { return values.size(); }
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

enum class Linkage { Average, Complete };

/// One agglomeration step. Member lists are sorted ids; `left` holds the
/// cluster whose smallest id sorts first.
struct Merge {
  std::vector<std::string> left;
  std::vector<std::string> right;
  double similarity = 0.0;
};

/// Merges while the best inter-cluster linkage similarity is >= threshold.
/// Ties go to the pair with the lexicographically smallest
/// (smallest-id-of-cluster) pair, so the result does not depend on input order.
std::vector<Merge> hac_merges(std::span<const EmbeddingVector> vectors, double threshold,
                              Linkage linkage = Linkage::Average);

/// Final partition as sorted member-id lists, ordered by their first id.
std::vector<std::vector<std::string>> hac_partition(std::span<const EmbeddingVector> vectors,
                                                    double threshold,
                                                    Linkage linkage = Linkage::Average);

struct SemanticCluster {
  std::string cluster_id;
  std::string issue;
  std::vector<std::string> member_ids;
  std::map<Position, std::vector<std::string>> per_position_members;

  bool operator==(const SemanticCluster&) const = default;
};

/// Groups statements by topic, then runs HAC within each topic. Every
/// statement needs an embedding. Cluster ids are "<topic>#<n>", n from 1 in
/// partition order.
std::vector<SemanticCluster> cluster_statements(std::span<const Statement> statements,
                                                std::span<const EmbeddingVector> embeddings,
                                                double threshold = 0.7,
                                                Linkage linkage = Linkage::Average);

Json to_json(const EmbeddingVector& e);
EmbeddingVector embedding_from_json(const Json& obj, std::size_t line_no = 0);
std::vector<EmbeddingVector> load_embeddings(const std::filesystem::path& path);

Json to_json(const SemanticCluster& c);
SemanticCluster cluster_from_json(const Json& obj, std::size_t line_no = 0);
std::vector<SemanticCluster> load_clusters(const std::filesystem::path& path);

}  // namespace forge
