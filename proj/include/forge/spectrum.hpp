#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "forge/ideology.hpp"
#include "forge/position.hpp"

namespace forge {

struct KMeansResult {
  std::vector<double> centroids;      // ascending
  std::vector<std::size_t> labels;    // cluster index per point, 0 = lowest centroid
  double objective = 0.0;             // within-cluster sum of squares
  std::vector<double> objective_trace;  // per Lloyd iteration, for the winning restart
};

/// Lloyd's algorithm on scalars with k-means++ seeding, best of `restarts`.
/// Clusters are relabeled by ascending centroid.
KMeansResult kmeans_1d(std::span<const double> points, std::size_t k, std::uint64_t seed,
                       std::size_t restarts = 10);

struct SpectrumMapping {
  std::map<std::string, Position> assignments;
  std::vector<double> centroids;   // 5, strictly increasing
  std::vector<double> boundaries;  // 4 midpoints between adjacent centroids
  double objective = 0.0;

  /// Position for a new score by the midpoint boundaries.
  Position classify(double score) const;
};

/// Clusters normalized ideology scores into the five positions, PL holding the
/// lowest centroid.
SpectrumMapping kmeans_map(std::span<const IdeologyScore> scores, std::uint64_t seed,
                           std::size_t k = 5);

/// Copies `scores` with `position` filled in from the mapping.
std::vector<IdeologyScore> apply_mapping(std::span<const IdeologyScore> scores,
                                         const SpectrumMapping& mapping);

/// Sum over same-cluster pairs, TP / sqrt((TP+FP)(TP+FN)); 0 when TP == 0.
double fowlkes_mallows(std::span<const std::string> true_labels,
                       std::span<const std::string> pred_labels);

struct HomogeneityCompleteness {
  double homogeneity = 1.0;
  double completeness = 1.0;
  double v_measure = 1.0;
};

HomogeneityCompleteness homogeneity_completeness(std::span<const std::string> true_labels,
                                                 std::span<const std::string> pred_labels);

/// For each predicted cluster, the fraction of its members in its majority
/// true class, keyed by that class. Clusters sharing a majority class are
/// pooled (sum of majority counts over sum of sizes).
std::map<std::string, double> purity(std::span<const std::string> true_labels,
                                     std::span<const std::string> pred_labels);

struct ClusterQuality {
  double fowlkes_mallows = 0.0;
  HomogeneityCompleteness hcv;
  std::map<std::string, double> purity_per_class;
};

ClusterQuality cluster_quality(std::span<const std::string> true_labels,
                               std::span<const std::string> pred_labels);

}  // namespace forge
