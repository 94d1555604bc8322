// Acceptance checks: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "forge/ideology.hpp"
#include "forge/pipeline.hpp"
#include "forge/prompts.hpp"
#include "forge/quintuplet.hpp"
#include "forge/spectrum.hpp"
#include "forge/stats.hpp"
#include "forge/synth.hpp"

namespace fs = std::filesystem;
using namespace forge;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream notes;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) notes << what;
      ok = false;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) c.expect(false, "runtime " + std::to_string(secs) + " s over limit");
  std::printf("%s  %-22s %8.3f s  %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), secs, c.notes.str().c_str());
  if (!c.ok) ++failures;
}

// Spearman by permutation enumeration over integer ranks 1..5.
double enum_p_identity() {
  std::vector<int> p = {1, 2, 3, 4, 5};
  int extreme = 0, total = 0;
  do {
    int d2 = 0;
    for (int i = 0; i < 5; ++i) d2 += (i + 1 - p[static_cast<std::size_t>(i)]) * (i + 1 - p[static_cast<std::size_t>(i)]);
    extreme += std::abs(1.0 - 6.0 * d2 / 120.0) >= 1.0 - 1e-12;
    ++total;
  } while (std::next_permutation(p.begin(), p.end()));
  return static_cast<double>(extreme) / total;
}

struct Pool {
  SemanticCluster cluster;
  ContradictionMatrix c;
  std::map<std::string, int> ordinal_of;
};

Pool make_pool(std::mt19937_64& rng, const std::function<double(int, int, std::mt19937_64&)>& contradiction) {
  Pool pool;
  pool.cluster.cluster_id = "T#1";
  std::vector<std::string> all;
  for (Position p : kAllPositions) {
    for (int k = 0; k < 4; ++k) {
      const std::string id = std::string(to_string(p)) + std::to_string(k);
      pool.cluster.per_position_members[p].push_back(id);
      pool.ordinal_of[id] = ordinal(p);
      all.push_back(id);
    }
  }
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      pool.c.set(all[a], all[b], contradiction(pool.ordinal_of[all[a]], pool.ordinal_of[all[b]], rng));
    }
  }
  return pool;
}

double exhaustive_best(const Pool& pool) {
  const auto& m = pool.cluster.per_position_members;
  double best = -1e300;
  for (int code = 0; code < 1024; ++code) {
    std::array<std::string, 5> q;
    int rest = code;
    for (std::size_t k = 0; k < 5; ++k, rest /= 4) {
      q[k] = m.at(*position_from_ordinal(static_cast<int>(k) + 1))[static_cast<std::size_t>(rest % 4)];
    }
    double s = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = i + 1; j < 5; ++j) {
        s += (j - i == 1 ? -1.0 : static_cast<double>(j - i)) * pool.c.at(q[i], q[j]);
      }
    }
    best = std::max(best, s);
  }
  return best;
}

double dp_objective(std::vector<double> x, std::size_t k) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  std::vector<double> s1(n + 1, 0), s2(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + x[i];
    s2[i + 1] = s2[i] + x[i] * x[i];
  }
  const double inf = 1e300;
  std::vector<std::vector<double>> d(k + 1, std::vector<double>(n + 1, inf));
  d[0][0] = 0;
  for (std::size_t c = 1; c <= k; ++c) {
    for (std::size_t b = c; b <= n; ++b) {
      for (std::size_t a = c - 1; a < b; ++a) {
        const double sum = s1[b] - s1[a];
        const double cost = s2[b] - s2[a] - sum * sum / static_cast<double>(b - a);
        d[c][b] = std::min(d[c][b], d[c - 1][a] + cost);
      }
    }
  }
  return d[k][n];
}

double jacobi_sv_norm_error(const Eigen::MatrixXd& p, const Eigen::VectorXd& s) {
  Eigen::MatrixXd a = p;
  const Eigen::Index n = a.cols();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (Eigen::Index i = 0; i < n - 1; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double al = a.col(i).squaredNorm(), be = a.col(j).squaredNorm(), ga = a.col(i).dot(a.col(j));
        if (ga == 0.0) continue;
        off = std::max(off, std::abs(ga) / std::sqrt(al * be));
        const double zeta = (be - al) / (2 * ga);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
        const double c = 1 / std::sqrt(1 + t * t), sn = c * t;
        const Eigen::VectorXd ci = a.col(i);
        a.col(i) = c * ci - sn * a.col(j);
        a.col(j) = sn * ci + c * a.col(j);
      }
    }
    if (off < 1e-15) break;
  }
  Eigen::VectorXd sv = a.colwise().norm().transpose();
  std::sort(sv.data(), sv.data() + sv.size(), std::greater<>());
  return (sv - s).norm() / sv.norm();
}

std::string golden(const std::string& name) {
  return read_text_file(fs::path(FORGE_TEST_DIR) / "golden" / name);
}

}  // namespace

int main() {
  criterion("spearman", 1.0, [](Check& c) {
    auto l = [](std::vector<std::string> o) { return RankedList::from_order("q", std::move(o)); };
    const auto a = l({"a", "b", "c", "d", "e"});
    const auto id = spearman_rho(a, l({"a", "b", "c", "d", "e"}));
    c.expect(id.rho == 1.0, "identity rho != 1");
    c.expect(spearman_rho(a, l({"e", "d", "c", "b", "a"})).rho == -1.0, "reversal rho != -1");
    c.expect(std::abs(spearman_rho(a, l({"b", "a", "c", "d", "e"})).rho - 0.9) <= 1e-12, "swap rho != 0.9");
    c.expect(std::abs(id.p_value - 2.0 / 120.0) <= 1e-12, "identity p != 2/120");
    c.expect(std::abs(id.p_value - enum_p_identity()) <= 1e-12, "p differs from enumeration");
  });

  criterion("quintuplet-score", 1.0, [](Check& c) {
    ContradictionMatrix m;
    const std::array<std::string, 5> ids = {"a", "b", "c", "d", "e"};
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = i + 1; j < 5; ++j) m.set(ids[i], ids[j], 1.0);
    }
    c.expect(quintuplet_score(ids, m) == 12.0, "uniform c=1 score != 12");
    int pairs = 0;
    for (int i = 1; i <= 5; ++i) {
      for (int j = i + 1; j <= 5; ++j, ++pairs) {
        c.expect(pair_weight(i, j) == (j - i == 1 ? -1 : j - i), "weight mismatch");
      }
    }
    c.expect(pairs == 10, "pair count");
  });

  criterion("optimizer", 30.0, [](Check& c) {
    std::mt19937_64 rng(2024);
    const Pool pool = make_pool(rng, [](int, int, std::mt19937_64& r) {
      return std::uniform_real_distribution<double>(0, 1)(r);
    });
    const double best = exhaustive_best(pool);
    int hits = 0;
    double worst = 1.0;
    bool increasing = true;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      OptimizeTrace trace;
      const Quintuplet q = optimize(pool.cluster, pool.c, {500, 50, seed}, &trace);
      hits += std::abs(q.score - best) <= 1e-12;
      worst = std::min(worst, q.score / best);
      double prev = trace.initial_score;
      for (double s : trace.accepted_scores) {
        increasing = increasing && s > prev;
        prev = s;
      }
    }
    c.notes << hits << "/100 optimal, worst " << worst << " of optimum ";
    c.expect(hits >= 90, "too few optimal runs");
    c.expect(worst >= 0.95, "a run fell outside 5% of the optimum");
    c.expect(increasing, "accepted scores not strictly increasing");
  });

  criterion("gradual-opposition", 0, [](Check& c) {
    int ok = 0;
    std::mt19937_64 rng(77);
    for (std::uint64_t run = 0; run < 100; ++run) {
      const Pool pool = make_pool(rng, [](int i, int j, std::mt19937_64& r) {
        return 0.1 * std::abs(i - j) + std::uniform_real_distribution<double>(0, 0.02)(r);
      });
      const Quintuplet q = optimize(pool.cluster, pool.c, {500, 50, run});
      double adj = 0, dist = 0;
      int na = 0, nd = 0;
      for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) {
          const double v = pool.c.at(q.members[i], q.members[j]);
          if (j - i == 1) {
            adj += v;
            ++na;
          } else {
            dist += v;
            ++nd;
          }
        }
      }
      ok += adj / na < dist / nd;
    }
    c.notes << ok << "/100 ";
    c.expect(ok >= 95, "too few gradual runs");
  });

  criterion("ideology-svd", 10.0, [](Check& c) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> w(2, 20);
    int separated = 0;
    for (int t = 0; t < 100; ++t) {
      CosponsorMatrix m;
      m.legislator_ids = {"A1", "A2", "A3", "B1", "B2", "B3"};
      m.counts = CountMatrix::Ones(6, 6);
      m.counts.topLeftCorner(3, 3).setConstant(w(rng));
      m.counts.bottomRightCorner(3, 3).setConstant(w(rng));
      const auto s = ideology_scores(m, Anchors{"A1", "B3"});
      const double max_a = std::max({s[0].normalized, s[1].normalized, s[2].normalized});
      const double min_b = std::min({s[3].normalized, s[4].normalized, s[5].normalized});
      separated += max_a < min_b;
    }
    c.notes << separated << "/100 separated ";
    c.expect(separated == 100, "bloc separation failed");
    double worst = 0;
    std::uniform_int_distribution<int> cell(0, 6);
    for (int n = 2; n <= 50; n += 4) {
      Eigen::MatrixXd p(n, n);
      for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = cell(rng);
      const auto f = svd_factors(p);
      worst = std::max(worst, (f.reconstruct() - p).norm() / p.norm());
      worst = std::max(worst, jacobi_sv_norm_error(p, f.s));
    }
    c.notes << "worst rel err " << worst << ' ';
    c.expect(worst <= 1e-8, "svd error above 1e-8");
  });

  criterion("spectrum-mapping", 0, [](Check& c) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0, 0.03);
    std::vector<double> x;
    std::vector<std::string> truth;
    for (int m = 0; m < 5; ++m) {
      for (int i = 0; i < 50; ++i) {
        x.push_back(0.1 + 0.2 * m + noise(rng));
        truth.push_back(std::to_string(m));
      }
    }
    const KMeansResult km = kmeans_1d(x, 5, 1);
    std::vector<std::string> pred;
    for (auto l : km.labels) pred.push_back(std::to_string(l));
    const double fm = fowlkes_mallows(truth, pred);
    c.notes << "FM " << fm << ' ';
    c.expect(fm >= 0.95, "FM below 0.95");
    c.expect(std::abs(km.objective - dp_objective(x, 5)) <= 1e-9, "objective differs from DP optimum");

    double worst = 0;
    for (int t = 0; t < 200; ++t) {
      const int n = std::uniform_int_distribution<int>(2, 40)(rng);
      std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
      for (auto& v : a) v = std::uniform_int_distribution<int>(0, 4)(rng);
      for (auto& v : b) v = std::uniform_int_distribution<int>(0, 5)(rng);
      double tp = 0, fp = 0, fn = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const bool st = a[static_cast<std::size_t>(i)] == a[static_cast<std::size_t>(j)];
          const bool sp = b[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(j)];
          tp += st && sp;
          fp += !st && sp;
          fn += st && !sp;
        }
      }
      const double fm_ref = tp == 0 ? 0 : tp / std::sqrt((tp + fp) * (tp + fn));
      double joint[5][6] = {};
      double pa[5] = {}, pb[6] = {};
      for (int i = 0; i < n; ++i) {
        joint[a[static_cast<std::size_t>(i)]][b[static_cast<std::size_t>(i)]] += 1.0 / n;
        pa[a[static_cast<std::size_t>(i)]] += 1.0 / n;
        pb[b[static_cast<std::size_t>(i)]] += 1.0 / n;
      }
      double mi = 0, ha = 0, hb = 0;
      for (int u = 0; u < 5; ++u) {
        if (pa[u] > 0) ha -= pa[u] * std::log(pa[u]);
        for (int v = 0; v < 6; ++v) {
          if (joint[u][v] > 0) mi += joint[u][v] * std::log(joint[u][v] / (pa[u] * pb[v]));
        }
      }
      for (int v = 0; v < 6; ++v) {
        if (pb[v] > 0) hb -= pb[v] * std::log(pb[v]);
      }
      std::vector<std::string> as, bs;
      for (int v : a) as.push_back(std::to_string(v));
      for (int v : b) bs.push_back(std::to_string(v));
      const auto hc = homogeneity_completeness(as, bs);
      worst = std::max(worst, std::abs(fowlkes_mallows(as, bs) - fm_ref));
      worst = std::max(worst, std::abs(hc.homogeneity - (ha < 1e-12 ? 1.0 : mi / ha)));
      worst = std::max(worst, std::abs(hc.completeness - (hb < 1e-12 ? 1.0 : mi / hb)));
    }
    c.expect(worst <= 1e-9, "quality metrics differ from brute force");
  });

  criterion("anova-tukey", 0, [](Check& c) {
    const AnovaResult r = one_way_anova({{Position::PL, {1, 2, 3}}, {Position::CR, {4, 5, 6}}});
    c.expect(std::abs(r.f_stat - 13.5) <= 1e-12, "F != 13.5");
    c.expect(r.df_between == 1 && r.df_within == 4, "df != (1,4)");
    // F(1,4) tail via the closed-form t(4) distribution at sqrt(F).
    const double th = std::atan(std::sqrt(13.5) / 2.0);
    const double ref = 1.0 - std::sin(th) * (1.0 + std::cos(th) * std::cos(th) / 2.0);
    c.notes << "p " << r.p_value << " ref " << ref << ' ';
    c.expect(std::abs(r.p_value - ref) <= 1e-3, "p off reference");

    const Groups g = {{Position::PL, {0.1, 0.5, 0.3}}, {Position::C, {1.2, 0.9, 1.4}}, {Position::CR, {2.0, 2.6, 2.2}}};
    const Groups swapped = {{Position::PL, g.at(Position::CR)}, {Position::C, g.at(Position::C)}, {Position::CR, g.at(Position::PL)}};
    const auto ta = tukey_hsd(g), tb = tukey_hsd(swapped);
    c.expect(std::abs(ta[1].mean_diff + tb[1].mean_diff) <= 1e-12 && std::abs(ta[1].p_adj - tb[1].p_adj) <= 1e-12 &&
                 std::abs(ta[1].ci_low + tb[1].ci_high) <= 1e-12,
             "tukey not symmetric");
    const std::vector<double> v = {0.3, 1.1, -0.4, 0.9};
    for (const auto& t : tukey_hsd({{Position::PL, v}, {Position::C, v}})) {
      c.expect(t.mean_diff == 0.0 && !t.significant, "identical groups significant");
    }
  });

  criterion("z-score-percentile", 0, [](Check& c) {
    const ScoreDistribution d{Position::C, 0.60, 0.06, {0.6}};
    c.expect(z_score(0.72, d).z == 2.0, "z != 2.0");
    const ScoreDistribution u{Position::C, 0.5, 0.25, {0.5}};
    c.expect(z_score(0.75, u).aligned && !z_score(std::nextafter(0.75, 1.0), u).aligned, "upper flip");
    c.expect(z_score(0.25, u).aligned && !z_score(0.25 - 1e-12, u).aligned, "lower flip");
    const ScoreDistribution p = make_distribution(Position::C, {0.1, 0.2, 0.2, 0.4});
    c.expect(rank_percentile(0.2, p) == 50.0 && rank_percentile(0.1, p) == 12.5 &&
                 rank_percentile(0.3, p) == 75.0 && rank_percentile(0.0, p) == 0.0 &&
                 rank_percentile(0.4, p) == 87.5,
             "midrank percentile");
  });

  criterion("chatml-emission", 0, [](Check& c) {
    const std::vector<std::string> ranked = {
        "We must raise the minimum wage.", "Wages should rise with productivity.",
        "Wage policy belongs to the states.", "Mandated wages cost jobs.",
        "The minimum wage should be abolished."};
    const ChatRecord qa = build_qa_record("Should the minimum wage be raised?",
                                          "Yes. Every worker deserves a wage they can live on.", Position::PL);
    c.expect(qa.render() == golden("qa.txt"), "qa golden");
    c.expect(build_cloze_record(*cloze_from_sentence("We support amending the Antiquities Act of 1906."),
                                Leaning::Center).render() == golden("cloze.txt"),
             "cloze golden");
    const Bill b{"B1", "Clean Water Act Amendments", "To amend the Federal Water Pollution Control Act.",
                 "Environmental Protection", {"Water quality", "Wetlands"}, "L1", "D"};
    c.expect(build_bill_record(b, BillMode::Comprehension).render() == golden("bill.txt"), "bill golden");
    c.expect(build_ranking_record("Minimum Wage", ranked, Position::LW, 1).render() == golden("ranking.txt"),
             "ranking golden");
    c.expect(qa.system.find("strong and unwavering political ideology") != std::string::npos, "system message");

    const std::vector<std::string> subj = {"We", "I", "Our party", "Our members"};
    const std::vector<std::string> verb = {"support", "oppose", "will defend", "strongly reject", "must protect"};
    const std::vector<std::string> obj = {"lower taxes.", "clean energy for all.", "secure borders, and we act."};
    std::mt19937_64 rng(9);
    int round_trips = 0;
    for (int i = 0; i < 100; ++i) {
      const std::string s = subj[rng() % subj.size()] + " " + verb[rng() % verb.size()] + " " + obj[rng() % obj.size()];
      const auto cz = cloze_from_sentence(s);
      round_trips += cz && fill_cloze(cz->cloze, cz->blanks) == s;
    }
    c.notes << round_trips << "/100 round trips ";
    c.expect(round_trips == 100, "cloze round trip");
  });

  criterion("end-to-end-smoke", 120.0, [](Check& c) {
    const fs::path dir = fs::temp_directory_path() / ("forge-acceptance-" + std::to_string(std::random_device{}()));
    const SynthCorpus corpus = make_synth_corpus();
    c.expect(corpus.truth.size() == 50 && corpus.sponsorships.size() == 500 && corpus.statements.size() == 200,
             "corpus size");
    const auto files = write_synth_corpus(corpus, dir / "data");
    PipelineConfig cfg;
    cfg.out_dir = dir / "run";
    cfg.inputs = {files.at("sponsorships"), files.at("statements"), files.at("embeddings"),
                  files.at("bills"),        files.at("scores"),     files.at("qa"),
                  files.at("cloze"),        files.at("votes")};
    cfg.oracle.backend = OracleBackend::CacheFile;
    cfg.oracle.cache_path = files.at("cache");
    cfg.anchors = corpus.anchors;
    cfg.seeds = {{"map", 1}, {"quintuplets", 2}, {"emit-training", 3}};
    cfg.report_formats = {"jsonl", "csv"};
    run_pipeline(cfg, {kStages.begin(), kStages.end()});
    const Json m = Json::parse(read_text_file(cfg.out_dir / "manifest.json"));
    c.expect(m["stages"].size() == kStages.size(), "manifest stage count");
    bool digests = true;
    for (const auto& s : m["stages"]) {
      for (const auto& [path, digest] : s["outputs"].items()) digests = digests && file_sha256(path) == digest;
    }
    c.expect(digests, "manifest digests");
    const auto quints = load_quintuplets(cfg.out_dir / "quintuplets.jsonl");
    c.notes << quints.size() << " quintuplets ";
    c.expect(!quints.empty(), "no quintuplets");
    std::error_code ec;
    fs::remove_all(dir, ec);
  });

  return failures == 0 ? 0 : 1;
}
