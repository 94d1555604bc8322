#include "forge/ideology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace forge {

SvdFactors<double> svd_factors(const CosponsorMatrix& m) {
  return svd_factors(m.counts.cast<double>());
}

std::vector<IdeologyScore> ideology_scores(const CosponsorMatrix& m,
                                           const std::optional<Anchors>& anchors) {
  const Eigen::Index n = m.size();
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 legislators");
  std::optional<Eigen::Index> left, right;
  if (anchors) {
    left = m.index_of(anchors->left_id);
    right = m.index_of(anchors->right_id);
    if (!left) throw Error(ErrorCode::AnchorMissing, anchors->left_id);
    if (!right) throw Error(ErrorCode::AnchorMissing, anchors->right_id);
  }

  const Eigen::MatrixXd p = m.counts.cast<double>();
  const SvdFactors<double> f = svd_factors(p);
  Eigen::VectorXd raw = f.vt.row(1).transpose();

  // Fold in legislators with an empty column from their co-sponsorship row.
  const Eigen::VectorXd column_mass = p.colwise().sum().transpose();
  const Eigen::VectorXd spectral = raw;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (column_mass(i) != 0.0) continue;
    const double row_mass = p.row(i).sum();
    if (row_mass > 0.0) raw(i) = p.row(i).dot(spectral) / row_mass;
  }

  bool flip = false;
  if (anchors) {
    if (raw(*left) == raw(*right)) {
      throw Error(ErrorCode::ZeroSpread, "anchors share the same score");
    }
    flip = raw(*left) > raw(*right);
  } else {
    auto first = std::min_element(m.legislator_ids.begin(), m.legislator_ids.end());
    flip = raw(first - m.legislator_ids.begin()) > 0.0;
  }
  if (flip) raw = -raw;

  const double lo = raw.minCoeff();
  const double hi = raw.maxCoeff();
  if (!(hi > lo)) throw Error(ErrorCode::ZeroSpread, "all raw scores equal");

  std::vector<IdeologyScore> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.push_back({m.legislator_ids[static_cast<std::size_t>(i)], raw(i),
                   (raw(i) - lo) / (hi - lo), std::nullopt});
  }
  return out;
}

ScoreDistribution make_distribution(Position position, std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "empty distribution");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {position, mean, std::sqrt(ss / n), std::move(values)};
}

ZScore z_score(double p_score, const ScoreDistribution& dist) {
  if (!(dist.std > 0.0)) throw Error(ErrorCode::ZeroStd, std::string(to_string(dist.position)));
  const double z = (p_score - dist.mean) / dist.std;
  return {z, z >= -1.0 && z <= 1.0};
}

double rank_percentile(double p_score, const ScoreDistribution& dist) {
  if (dist.values.empty()) throw Error(ErrorCode::InvalidArgument, "empty distribution");
  const auto lower = std::lower_bound(dist.values.begin(), dist.values.end(), p_score);
  const auto upper = std::upper_bound(lower, dist.values.end(), p_score);
  const double below = static_cast<double>(lower - dist.values.begin());
  const double equal = static_cast<double>(upper - lower);
  return 100.0 * (below + 0.5 * equal) / static_cast<double>(dist.values.size());
}

std::vector<AgentComparison> compare_agent(std::span<const IdeologyScore> scores,
                                           const std::string& agent_id) {
  const IdeologyScore* agent = nullptr;
  std::vector<std::vector<double>> by_position(5);
  for (const auto& s : scores) {
    if (s.legislator_id == agent_id) {
      agent = &s;
      continue;
    }
    if (!s.position) {
      throw Error(ErrorCode::MissingPosition, s.legislator_id);
    }
    by_position[static_cast<std::size_t>(ordinal(*s.position) - 1)].push_back(s.normalized);
  }
  if (!agent) throw Error(ErrorCode::InvalidArgument, "agent not scored: " + agent_id);

  std::vector<AgentComparison> out;
  for (Position p : kAllPositions) {
    auto& values = by_position[static_cast<std::size_t>(ordinal(p) - 1)];
    if (values.empty()) continue;
    ScoreDistribution dist = make_distribution(p, std::move(values));
    AgentComparison row;
    row.position = p;
    row.h_mean = dist.mean;
    row.h_std = dist.std;
    row.ideology = agent->normalized;
    row.z = z_score(agent->normalized, dist);
    row.percentile = rank_percentile(agent->normalized, dist);
    out.push_back(row);
  }
  return out;
}

Json to_json(const IdeologyScore& s) {
  Json j;
  j["legislator_id"] = s.legislator_id;
  j["raw"] = s.raw;
  j["normalized"] = s.normalized;
  if (s.position) j["position"] = std::string(to_string(*s.position));
  return j;
}

IdeologyScore ideology_score_from_json(const Json& obj, std::size_t line_no) {
  FieldReader r(obj, line_no);
  r.only({"legislator_id", "raw", "normalized", "position"});
  IdeologyScore s;
  s.legislator_id = r.string("legislator_id");
  s.raw = r.number("raw");
  s.normalized = r.number("normalized");
  if (s.normalized < 0.0 || s.normalized > 1.0) r.fail("normalized", "outside [0, 1]");
  if (auto pos = r.optional_string("position")) {
    s.position = parse_position(*pos);
    if (!s.position) r.fail("position", "unknown position label");
  }
  return s;
}

std::vector<IdeologyScore> load_ideology_scores(const std::filesystem::path& path) {
  std::vector<IdeologyScore> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const Json& obj : read_json_lines(path)) {
    ++line_no;
    auto s = ideology_score_from_json(obj, line_no);
    if (!seen.insert(s.legislator_id).second) {
      throw LineError(ErrorCode::DuplicateId, line_no, s.legislator_id);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace forge
