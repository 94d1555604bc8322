#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/jsonl.hpp"
#include "forge/position.hpp"

namespace forge {

/// One model's ordering of a quintuplet's statements. `ranks[i]` is the rank
/// of `ids[i]`; fractional (average) ranks appear only for ties.
struct RankedList {
  std::optional<Position> source_position;
  std::string quintuplet_id;
  std::vector<std::string> ids;
  std::vector<double> ranks;

  /// Strict order, best first: ranks 1..n.
  static RankedList from_order(std::string quintuplet_id, std::vector<std::string> order,
                               std::optional<Position> source = std::nullopt);

  /// Ranks from raw scores, lower score = better; ties get average ranks.
  static RankedList from_scores(std::string quintuplet_id, std::vector<std::string> ids,
                                std::span<const double> scores,
                                std::optional<Position> source = std::nullopt);

  std::optional<double> rank_of(std::string_view id) const;
};

/// Average ranks (1-based) of `values`, ascending.
std::vector<double> fractional_ranks(std::span<const double> values);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// 1 - 6 sum d^2 / (n (n^2 - 1)) for strict rankings, the Pearson
/// correlation of the rank vectors otherwise.
double rank_correlation(std::span<const double> ra, std::span<const double> rb);

/// Two-sided exact permutation probability P(|rho_perm| >= |rho|) over all
/// n! rearrangements of `rb`. Supports n <= 8.
double exact_permutation_p(std::span<const double> ra, std::span<const double> rb);

/// Lists must cover the same quintuplet and the same statement ids.
SpearmanResult spearman_rho(const RankedList& a, const RankedList& b);

enum class Stars { NotSignificant, One, Two, Three };
Stars stars_for(double p);
std::string_view to_string(Stars s) noexcept;

struct Agreement {
  double mean_rho = 0.0;
  double p_value = 1.0;
  Stars stars = Stars::NotSignificant;
  std::size_t pairs = 0;
  std::vector<double> per_pair_rho;
  std::vector<double> per_pair_p;
};

/// Pairs lists by quintuplet id; p from a two-sided one-sample t-test of the
/// per-quintuplet rho values against 0.
Agreement aggregate_agreement(std::span<const RankedList> lists_a,
                              std::span<const RankedList> lists_b);

struct AnovaResult {
  double f_stat = 0.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double p_value = 1.0;
};

using Groups = std::map<Position, std::vector<double>>;

AnovaResult one_way_anova(const Groups& groups);

struct TukeyContrast {
  Position first = Position::PL;
  Position second = Position::LW;
  double mean_diff = 0.0;  // mean(second) - mean(first)
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_adj = 1.0;
  bool significant = false;  // CI excludes 0
};

/// Tukey-Kramer all-pairs contrasts, first < second in position order.
std::vector<TukeyContrast> tukey_hsd(const Groups& groups, double alpha = 0.05);

/// Studentized range distribution for k groups and df degrees of freedom
/// (df = infinity allowed), by numerical integration.
double studentized_range_cdf(double q, std::size_t k, double df);
double studentized_range_quantile(double prob, std::size_t k, double df);

/// F(df1, df2) upper tail and Student t two-sided tail.
double f_sf(double f, double df1, double df2);
double t_two_sided_p(double t, double df);

/// One cell of the position-by-position agreement heatmap.
struct AgreementCell {
  Position a = Position::PL;
  Position b = Position::PL;
  Agreement agreement;
};

/// Groups both sides by source position and aggregates every pair of
/// positions that share at least two quintuplets. Lists must carry a
/// source position.
std::vector<AgreementCell> agreement_matrix(std::span<const RankedList> lists_a,
                                            std::span<const RankedList> lists_b);

/// ANOVA plus all Tukey contrasts for one test and axis.
struct PositioningReport {
  PositioningTest test = PositioningTest::PComp;
  Axis axis = Axis::Economic;
  AnovaResult anova;
  std::vector<TukeyContrast> contrasts;
};

/// One report per (test, axis) with at least two positions of two or more
/// samples each; other combinations are skipped.
std::vector<PositioningReport> positioning_report(std::span<const ScoreSample> samples,
                                                  double alpha = 0.05);

Json to_json(const AgreementCell& c);
Json to_json(const PositioningReport& r);

Json to_json(const RankedList& r);
RankedList ranked_list_from_json(const Json& obj, std::size_t line_no = 0);
std::vector<RankedList> load_ranked_lists(const std::filesystem::path& path);

}  // namespace forge
