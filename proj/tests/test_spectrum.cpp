#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "forge/error.hpp"
#include "forge/spectrum.hpp"
#include "support.hpp"

namespace forge {
namespace {

// Optimal 1-D k-means objective by dynamic programming over sorted points.
double dp_optimal_objective(std::vector<double> x, std::size_t k) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + x[i];
    s2[i + 1] = s2[i] + x[i] * x[i];
  }
  auto cost = [&](std::size_t a, std::size_t b) {  // points [a, b)
    const double m = static_cast<double>(b - a);
    const double sum = s1[b] - s1[a];
    return (s2[b] - s2[a]) - sum * sum / m;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(k + 1, std::vector<double>(n + 1, inf));
  d[0][0] = 0.0;
  for (std::size_t c = 1; c <= k; ++c) {
    for (std::size_t b = c; b <= n; ++b) {
      for (std::size_t a = c - 1; a < b; ++a) {
        if (d[c - 1][a] < inf) d[c][b] = std::min(d[c][b], d[c - 1][a] + cost(a, b));
      }
    }
  }
  return d[k][n];
}

double brute_fm(const std::vector<int>& t, const std::vector<int>& p) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      const bool st = t[i] == t[j], sp = p[i] == p[j];
      tp += st && sp;
      fp += !st && sp;
      fn += st && !sp;
    }
  }
  return tp == 0 ? 0.0 : tp / std::sqrt((tp + fp) * (tp + fn));
}

// Homogeneity and completeness from mutual information over a dense table.
std::pair<double, double> brute_hc(const std::vector<int>& t, const std::vector<int>& p) {
  const int kt = *std::max_element(t.begin(), t.end()) + 1;
  const int kp = *std::max_element(p.begin(), p.end()) + 1;
  std::vector<std::vector<double>> joint(static_cast<std::size_t>(kt),
                                         std::vector<double>(static_cast<std::size_t>(kp), 0.0));
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) joint[static_cast<std::size_t>(t[i])][static_cast<std::size_t>(p[i])] += 1.0 / n;
  std::vector<double> pt(static_cast<std::size_t>(kt), 0.0), pp(static_cast<std::size_t>(kp), 0.0);
  for (int a = 0; a < kt; ++a) {
    for (int b = 0; b < kp; ++b) {
      pt[static_cast<std::size_t>(a)] += joint[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      pp[static_cast<std::size_t>(b)] += joint[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
  }
  auto h = [](const std::vector<double>& v) {
    double out = 0;
    for (double q : v) if (q > 0) out -= q * std::log(q);
    return out;
  };
  double mi = 0;
  for (int a = 0; a < kt; ++a) {
    for (int b = 0; b < kp; ++b) {
      const double q = joint[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      if (q > 0) mi += q * std::log(q / (pt[static_cast<std::size_t>(a)] * pp[static_cast<std::size_t>(b)]));
    }
  }
  const double ht = h(pt), hp = h(pp);
  return {ht < 1e-12 ? 1.0 : mi / ht, hp < 1e-12 ? 1.0 : mi / hp};
}

std::vector<std::string> names(const std::vector<int>& v) {
  std::vector<std::string> out;
  for (int x : v) out.push_back("c" + std::to_string(x));
  return out;
}

std::vector<double> five_modes(std::uint64_t seed, std::vector<int>* truth) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.03);
  std::vector<double> x;
  for (int m = 0; m < 5; ++m) {
    for (int i = 0; i < 50; ++i) {
      x.push_back(0.1 + 0.2 * m + noise(rng));
      if (truth) truth->push_back(m);
    }
  }
  return x;
}

TEST(KMeans, RecoversFiveModes) {
  std::vector<int> truth;
  const std::vector<double> x = five_modes(1, &truth);
  const KMeansResult km = kmeans_1d(x, 5, 42);
  std::vector<int> pred(km.labels.begin(), km.labels.end());
  EXPECT_GE(fowlkes_mallows(names(truth), names(pred)), 0.95);
  EXPECT_NEAR(km.objective, dp_optimal_objective(x, 5), 1e-9);
  for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(km.centroids[c], 0.1 + 0.2 * static_cast<double>(c), 0.02);
}

TEST(KMeans, MatchesDpOptimumOnManySeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::vector<double> x = five_modes(100 + seed, nullptr);
    EXPECT_NEAR(kmeans_1d(x, 5, seed).objective, dp_optimal_objective(x, 5), 1e-9) << seed;
  }
}

TEST(KMeans, TraceNonIncreasingAndLabelsSorted) {
  const std::vector<double> x = five_modes(3, nullptr);
  const KMeansResult km = kmeans_1d(x, 5, 8);
  for (std::size_t i = 1; i < km.objective_trace.size(); ++i) {
    EXPECT_LE(km.objective_trace[i], km.objective_trace[i - 1] + 1e-15);
  }
  EXPECT_TRUE(std::is_sorted(km.centroids.begin(), km.centroids.end()));
  EXPECT_EQ(km.objective, km.objective_trace.back());
}

TEST(KMeans, Deterministic) {
  const std::vector<double> x = five_modes(4, nullptr);
  EXPECT_EQ(kmeans_1d(x, 5, 9).labels, kmeans_1d(x, 5, 9).labels);
}

TEST(KMeans, Errors) {
  const std::vector<double> few = {0.1, 0.1, 0.2, 0.3, 0.4};
  EXPECT_FORGE_ERROR(kmeans_1d(few, 5, 0), ErrorCode::TooFewPoints);
  EXPECT_FORGE_ERROR(kmeans_1d(few, 0, 0), ErrorCode::InvalidArgument);
}

TEST(Mapping, LowestCentroidIsPl) {
  std::vector<IdeologyScore> scores;
  const std::vector<double> x = five_modes(5, nullptr);
  for (std::size_t i = 0; i < x.size(); ++i) scores.push_back({"L" + std::to_string(i), 0, x[i], {}});
  const SpectrumMapping m = kmeans_map(scores, 1);
  ASSERT_EQ(m.boundaries.size(), 4u);
  EXPECT_EQ(m.classify(-1.0), Position::PL);
  EXPECT_EQ(m.classify(2.0), Position::CR);
  EXPECT_EQ(m.classify(0.5), Position::C);
  const auto mapped = apply_mapping(scores, m);
  for (const auto& s : mapped) EXPECT_EQ(*s.position, m.assignments.at(s.legislator_id));
  std::vector<IdeologyScore> extra = {{"new", 0, 0.31, {}}};
  EXPECT_EQ(*apply_mapping(extra, m)[0].position, Position::LW);
  EXPECT_FORGE_ERROR(kmeans_map(scores, 1, 4), ErrorCode::InvalidArgument);
}

TEST(Quality, MatchesBruteForceOracles) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> len(2, 40), kt(1, 5), kp(1, 6);
    const int n = len(rng), ct = kt(rng), cp = kp(rng);
    std::vector<int> t(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      t[static_cast<std::size_t>(i)] = std::uniform_int_distribution<int>(0, ct - 1)(rng);
      p[static_cast<std::size_t>(i)] = std::uniform_int_distribution<int>(0, cp - 1)(rng);
    }
    const auto tn = names(t), pn = names(p);
    EXPECT_NEAR(fowlkes_mallows(tn, pn), brute_fm(t, p), 1e-9);
    const auto [h, c] = brute_hc(t, p);
    const HomogeneityCompleteness hc = homogeneity_completeness(tn, pn);
    EXPECT_NEAR(hc.homogeneity, h, 1e-9);
    EXPECT_NEAR(hc.completeness, c, 1e-9);
  }
}

TEST(Quality, IdenticalLabelingsArePerfect) {
  const std::vector<std::string> a = {"x", "x", "y", "z"};
  const std::vector<std::string> renamed = {"1", "1", "2", "3"};
  EXPECT_DOUBLE_EQ(fowlkes_mallows(a, renamed), 1.0);
  const auto hc = homogeneity_completeness(a, renamed);
  EXPECT_DOUBLE_EQ(hc.v_measure, 1.0);
  const std::vector<std::string> shorter = {"x"};
  EXPECT_FORGE_ERROR(fowlkes_mallows(a, shorter), ErrorCode::LengthMismatch);
}

TEST(Quality, PurityPoolsSharedMajorities) {
  const std::vector<std::string> t = {"A", "A", "B", "A", "A", "A", "B", "B"};
  const std::vector<std::string> p = {"1", "1", "1", "2", "2", "2", "3", "3"};
  const auto pur = purity(t, p);
  EXPECT_DOUBLE_EQ(pur.at("A"), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(pur.at("B"), 1.0);
  const ClusterQuality q = cluster_quality(t, p);
  EXPECT_EQ(q.purity_per_class, pur);
}

}  // namespace
}  // namespace forge
