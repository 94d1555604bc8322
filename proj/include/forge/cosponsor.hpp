#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forge/corpus.hpp"

namespace forge {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// counts(i, j) = how often legislator i co-sponsored a bill introduced by j.
/// The diagonal holds introductions.
struct CosponsorMatrix {
  std::vector<std::string> legislator_ids;
  CountMatrix counts;

  Eigen::Index size() const { return static_cast<Eigen::Index>(legislator_ids.size()); }
  std::optional<Eigen::Index> index_of(std::string_view id) const;
};

/// Legislators are every id seen as sponsor or co-sponsor, sorted
/// lexicographically. Repeated records are counted, not deduplicated.
CosponsorMatrix build_matrix(std::span<const SponsorshipRecord> records);

/// Appends `agent_id` as a final row/column. The agent row counts COSPONSOR
/// votes by the voted bill's sponsor; the agent column and diagonal stay zero.
/// Votes cast by other agents are ignored.
CosponsorMatrix incorporate_agent_votes(const CosponsorMatrix& m, std::span<const VoteRecord> votes,
                                        std::span<const Bill> bills, const std::string& agent_id);

/// Returns a copy with rows/columns reordered so that new index k holds old
/// index perm[k].
CosponsorMatrix permute(const CosponsorMatrix& m, std::span<const Eigen::Index> perm);

// CSV: a header row of ids, then one row of integer counts per legislator.
std::string matrix_to_csv(const CosponsorMatrix& m);
CosponsorMatrix matrix_from_csv(std::string_view text);
void write_matrix_csv(const CosponsorMatrix& m, const std::filesystem::path& path);
CosponsorMatrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace forge
