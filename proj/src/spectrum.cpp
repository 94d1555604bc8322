#include "forge/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "forge/error.hpp"

namespace forge {
namespace {

struct Lloyd {
  std::vector<double> centroids;
  std::vector<std::size_t> labels;
  double objective = 0.0;
  std::vector<double> trace;
};

std::size_t nearest(double x, const std::vector<double>& centroids) {
  std::size_t best = 0;
  double best_d = std::abs(x - centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = std::abs(x - centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

double objective_of(std::span<const double> points, const std::vector<std::size_t>& labels,
                    const std::vector<double>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = points[i] - centroids[labels[i]];
    total += d * d;
  }
  return total;
}

std::vector<double> plus_plus_seeds(std::span<const double> points, std::size_t k,
                                    std::mt19937_64& rng) {
  std::vector<double> centers;
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  centers.push_back(points[pick(rng)]);
  std::vector<double> d2(points.size());
  while (centers.size() < k) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (points[i] - c) * (points[i] - c));
      d2[i] = best;
    }
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (total <= 0.0) {
      centers.push_back(points[pick(rng)]);
      continue;
    }
    std::discrete_distribution<std::size_t> weighted(d2.begin(), d2.end());
    centers.push_back(points[weighted(rng)]);
  }
  return centers;
}

Lloyd run_lloyd(std::span<const double> points, std::vector<double> centroids) {
  const std::size_t k = centroids.size();
  Lloyd out;
  out.labels.assign(points.size(), k);
  for (std::size_t iter = 0; iter < 1000; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = nearest(points[i], centroids);
      changed = changed || c != out.labels[i];
      out.labels[i] = c;
    }
    // An empty cluster takes the point farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (std::find(out.labels.begin(), out.labels.end(), c) != out.labels.end()) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = std::abs(points[i] - centroids[out.labels[i]]);
        const bool movable =
            std::count(out.labels.begin(), out.labels.end(), out.labels[i]) > 1;
        if (movable && d > far_d) {
          far_d = d;
          far = i;
        }
      }
      out.labels[far] = c;
      centroids[c] = points[far];
      changed = true;
    }
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sum[out.labels[i]] += points[i];
      ++count[out.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) centroids[c] = sum[c] / static_cast<double>(count[c]);
    out.trace.push_back(objective_of(points, out.labels, centroids));
    if (!changed) break;
  }
  out.centroids = std::move(centroids);
  out.objective = out.trace.back();
  return out;
}

void check_lengths(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

struct Contingency {
  std::map<std::string, std::size_t> true_sizes;
  std::map<std::string, std::size_t> pred_sizes;
  std::map<std::pair<std::string, std::string>, std::size_t> cells;  // (true, pred)
  double n = 0.0;
};

Contingency contingency(std::span<const std::string> t, std::span<const std::string> p) {
  Contingency c;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++c.true_sizes[t[i]];
    ++c.pred_sizes[p[i]];
    ++c.cells[{t[i], p[i]}];
  }
  c.n = static_cast<double>(t.size());
  return c;
}

double pairs(std::size_t m) {
  const double d = static_cast<double>(m);
  return 0.5 * d * (d - 1.0);
}

double entropy(const std::map<std::string, std::size_t>& sizes, double n) {
  double h = 0.0;
  for (const auto& [_, m] : sizes) {
    const double f = static_cast<double>(m) / n;
    if (f > 0.0) h -= f * std::log(f);
  }
  return h;
}

}  // namespace

KMeansResult kmeans_1d(std::span<const double> points, std::size_t k, std::uint64_t seed,
                       std::size_t restarts) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  const std::set<double> distinct(points.begin(), points.end());
  if (distinct.size() < k) {
    throw Error(ErrorCode::TooFewPoints, std::to_string(distinct.size()) + " distinct values for k=" +
                                             std::to_string(k));
  }
  Lloyd best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    Lloyd run = run_lloyd(points, plus_plus_seeds(points, k, rng));
    if (!have || run.objective < best.objective) {
      best = std::move(run);
      have = true;
    }
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return best.centroids[a] < best.centroids[b]; });
  std::vector<std::size_t> rank(k);
  for (std::size_t i = 0; i < k; ++i) rank[order[i]] = i;

  KMeansResult out;
  for (std::size_t i = 0; i < k; ++i) out.centroids.push_back(best.centroids[order[i]]);
  for (std::size_t label : best.labels) out.labels.push_back(rank[label]);
  out.objective = best.objective;
  out.objective_trace = std::move(best.trace);
  return out;
}

Position SpectrumMapping::classify(double score) const {
  std::size_t idx = 0;
  while (idx < boundaries.size() && score > boundaries[idx]) ++idx;
  return *position_from_ordinal(static_cast<int>(idx) + 1);
}

SpectrumMapping kmeans_map(std::span<const IdeologyScore> scores, std::uint64_t seed,
                           std::size_t k) {
  if (k != kAllPositions.size()) {
    throw Error(ErrorCode::InvalidArgument, "the spectrum has exactly 5 positions");
  }
  if (scores.size() < k) throw Error(ErrorCode::TooFewPoints, std::to_string(scores.size()));
  std::vector<double> points;
  points.reserve(scores.size());
  for (const auto& s : scores) points.push_back(s.normalized);

  const KMeansResult km = kmeans_1d(points, k, seed);
  SpectrumMapping out;
  out.centroids = km.centroids;
  out.objective = km.objective;
  for (std::size_t c = 0; c + 1 < k; ++c) {
    out.boundaries.push_back(0.5 * (km.centroids[c] + km.centroids[c + 1]));
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.assignments[scores[i].legislator_id] =
        *position_from_ordinal(static_cast<int>(km.labels[i]) + 1);
  }
  return out;
}

std::vector<IdeologyScore> apply_mapping(std::span<const IdeologyScore> scores,
                                         const SpectrumMapping& mapping) {
  std::vector<IdeologyScore> out(scores.begin(), scores.end());
  for (auto& s : out) {
    auto it = mapping.assignments.find(s.legislator_id);
    s.position = it != mapping.assignments.end() ? it->second : mapping.classify(s.normalized);
  }
  return out;
}

double fowlkes_mallows(std::span<const std::string> true_labels,
                       std::span<const std::string> pred_labels) {
  check_lengths(true_labels, pred_labels);
  if (true_labels.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 labels");
  const Contingency c = contingency(true_labels, pred_labels);
  double tp = 0.0, tp_fp = 0.0, tp_fn = 0.0;
  for (const auto& [_, m] : c.cells) tp += pairs(m);
  for (const auto& [_, m] : c.pred_sizes) tp_fp += pairs(m);
  for (const auto& [_, m] : c.true_sizes) tp_fn += pairs(m);
  if (tp == 0.0) return 0.0;
  return tp / std::sqrt(tp_fp * tp_fn);
}

HomogeneityCompleteness homogeneity_completeness(std::span<const std::string> true_labels,
                                                 std::span<const std::string> pred_labels) {
  check_lengths(true_labels, pred_labels);
  HomogeneityCompleteness out;
  if (true_labels.empty()) return out;
  const Contingency c = contingency(true_labels, pred_labels);
  const double h_true = entropy(c.true_sizes, c.n);
  const double h_pred = entropy(c.pred_sizes, c.n);
  double h_true_given_pred = 0.0, h_pred_given_true = 0.0;
  for (const auto& [key, m] : c.cells) {
    const double joint = static_cast<double>(m) / c.n;
    h_true_given_pred -=
        joint * std::log(static_cast<double>(m) / static_cast<double>(c.pred_sizes.at(key.second)));
    h_pred_given_true -=
        joint * std::log(static_cast<double>(m) / static_cast<double>(c.true_sizes.at(key.first)));
  }
  out.homogeneity = h_true == 0.0 ? 1.0 : 1.0 - h_true_given_pred / h_true;
  out.completeness = h_pred == 0.0 ? 1.0 : 1.0 - h_pred_given_true / h_pred;
  const double sum = out.homogeneity + out.completeness;
  out.v_measure = sum == 0.0 ? 0.0 : 2.0 * out.homogeneity * out.completeness / sum;
  return out;
}

std::map<std::string, double> purity(std::span<const std::string> true_labels,
                                     std::span<const std::string> pred_labels) {
  check_lengths(true_labels, pred_labels);
  const Contingency c = contingency(true_labels, pred_labels);
  std::map<std::string, std::pair<std::size_t, std::size_t>> pooled;  // majority, size
  for (const auto& [pred, size] : c.pred_sizes) {
    std::string majority;
    std::size_t best = 0;
    for (const auto& [cls, _] : c.true_sizes) {
      auto it = c.cells.find({cls, pred});
      const std::size_t m = it == c.cells.end() ? 0 : it->second;
      if (m > best) {
        best = m;
        majority = cls;
      }
    }
    pooled[majority].first += best;
    pooled[majority].second += size;
  }
  std::map<std::string, double> out;
  for (const auto& [cls, counts] : pooled) {
    out[cls] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return out;
}

ClusterQuality cluster_quality(std::span<const std::string> true_labels,
                               std::span<const std::string> pred_labels) {
  return {fowlkes_mallows(true_labels, pred_labels),
          homogeneity_completeness(true_labels, pred_labels), purity(true_labels, pred_labels)};
}

}  // namespace forge
