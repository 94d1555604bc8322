#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "forge/oracle.hpp"
#include "forge/position.hpp"
#include "forge/semantic_cluster.hpp"

namespace forge {

/// Five statement ids; members[k] speaks for the position with ordinal k + 1.
struct Quintuplet {
  std::string cluster_id;
  std::array<std::string, 5> members;
  double score = 0.0;

  const std::string& at(Position p) const { return members[static_cast<std::size_t>(ordinal(p) - 1)]; }
  bool operator==(const Quintuplet&) const = default;
};

/// -1 for adjacent positions, otherwise the ordinal distance. Requires
/// 1 <= i < j <= 5.
int pair_weight(int i, int j);

/// Weighted contradiction c * pair_weight(i, j). Requires 0 <= c <= 1.
double pair_rank(double c, int i, int j);

/// Sum of pair_rank over the ten position pairs i < j.
double quintuplet_score(const std::array<std::string, 5>& members, const ContradictionMatrix& c);
double quintuplet_score(const Quintuplet& q, const ContradictionMatrix& c);

struct OptimizerConfig {
  std::size_t max_iterations = 500;
  std::size_t patience = 50;  // consecutive non-improving swaps before stopping
  std::uint64_t seed = 0;
};

struct OptimizeTrace {
  double initial_score = 0.0;
  std::vector<double> accepted_scores;  // each new best score, in order
  std::size_t iterations = 0;
};

/// Hill climbing over one statement per position. Starts from a seeded
/// random quintuplet; each iteration replaces the member at a random
/// position with a different random candidate of that position and keeps
/// the change only if the score strictly increases. Rejected swaps are not
/// retried until the next accepted one. Once every swap has been rejected,
/// or after `patience` consecutive rejections, the climb restarts from a new
/// random quintuplet; the best quintuplet seen within `max_iterations` is
/// returned.
Quintuplet optimize(const SemanticCluster& cluster, const ContradictionMatrix& c,
                    const OptimizerConfig& cfg, OptimizeTrace* trace = nullptr);

/// The position's own statement first, then the rest by ascending
/// pair_rank against it; ties by ordinal distance, then statement id.
std::array<std::string, 5> position_rerank(const Quintuplet& q, const ContradictionMatrix& c,
                                           Position p);

/// True when every position has at least one candidate.
bool has_all_positions(const SemanticCluster& cluster);

struct ForgeSummary {
  std::vector<Quintuplet> quintuplets;
  std::vector<std::string> skipped_clusters;  // missing a position
};

/// Optimizes every complete cluster; cluster i uses seed `seed + i`.
ForgeSummary optimize_all(std::span<const SemanticCluster> clusters, const ContradictionMatrix& c,
                          const OptimizerConfig& cfg);

/// One re-ranked list per position per quintuplet.
struct RankedSet {
  std::string quintuplet_id;
  Position position = Position::C;
  std::array<std::string, 5> order;
};

std::vector<RankedSet> rankset(std::span<const Quintuplet> quintuplets, const ContradictionMatrix& c);

/// "<cluster_id>" identifies a quintuplet; clusters yield at most one.
Json to_json(const Quintuplet& q);
Quintuplet quintuplet_from_json(const Json& obj, std::size_t line_no = 0);
std::vector<Quintuplet> load_quintuplets(const std::filesystem::path& path);

Json to_json(const RankedSet& r);
RankedSet ranked_set_from_json(const Json& obj, std::size_t line_no = 0);
std::vector<RankedSet> load_ranked_sets(const std::filesystem::path& path);

}  // namespace forge
