#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "forge/cosponsor.hpp"
#include "forge/error.hpp"
#include "forge/jsonl.hpp"
#include "forge/position.hpp"

namespace forge {

/// Full SVD p = u * diag(s) * vt with s non-increasing.
template <typename Scalar>
struct SvdFactors {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> u;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> s;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vt;

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> reconstruct() const {
    return u * s.asDiagonal() * vt;
  }
};

template <typename Derived>
SvdFactors<typename Derived::Scalar> svd_factors(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (p.rows() != p.cols() || p.rows() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need a square matrix with n >= 2");
  }
  if (p.isZero(Scalar(0))) throw Error(ErrorCode::DegenerateMatrix, "all-zero matrix");
  Eigen::BDCSVD<Matrix> svd(p.derived(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV().transpose()};
}

SvdFactors<double> svd_factors(const CosponsorMatrix& m);

struct IdeologyScore {
  std::string legislator_id;
  double raw = 0.0;
  double normalized = 0.0;
  std::optional<Position> position;

  bool operator==(const IdeologyScore&) const = default;
};

struct Anchors {
  std::string left_id;
  std::string right_id;
};

/// Scores legislators on the right-singular direction paired with the second
/// largest singular value, oriented and min-max scaled to [0, 1].
///
/// Orientation: with anchors, left scores below right; otherwise the
/// lexicographically smallest id gets raw <= 0. A legislator whose column is
/// entirely zero (no one co-sponsored their bills, e.g. a simulated agent)
/// has no signal in that direction; its raw score is instead the
/// co-sponsorship-weighted mean of the raw scores of the legislators it
/// co-sponsored.
std::vector<IdeologyScore> ideology_scores(const CosponsorMatrix& m,
                                           const std::optional<Anchors>& anchors = std::nullopt);

struct ScoreDistribution {
  Position position = Position::C;
  double mean = 0.0;
  double std = 0.0;  // population convention
  std::vector<double> values;  // sorted
};

/// Builds a distribution; throws InvalidArgument on empty input.
ScoreDistribution make_distribution(Position position, std::vector<double> values);

struct ZScore {
  double z = 0.0;
  bool aligned = false;  // |z| <= 1
};

ZScore z_score(double p_score, const ScoreDistribution& dist);

/// Midrank percentile: 100 * (#below + 0.5 * #equal) / n.
double rank_percentile(double p_score, const ScoreDistribution& dist);

struct AgentComparison {
  Position position = Position::C;
  double h_mean = 0.0;
  double h_std = 0.0;
  double ideology = 0.0;
  ZScore z;
  double percentile = 0.0;
};

/// Compares one agent's normalized score against the per-position
/// distributions of every other scored legislator (position required).
/// Positions with no members are skipped.
std::vector<AgentComparison> compare_agent(std::span<const IdeologyScore> scores,
                                           const std::string& agent_id);

Json to_json(const IdeologyScore& s);
IdeologyScore ideology_score_from_json(const Json& obj, std::size_t line_no = 0);
std::vector<IdeologyScore> load_ideology_scores(const std::filesystem::path& path);

}  // namespace forge
