#include "forge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <mutex>
#include <set>
#include <tuple>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "forge/error.hpp"

namespace forge {
namespace {

// Relative-to-integer slack when comparing permuted correlations, so exact
// ties in rho are not lost to rounding.
constexpr double kRhoTieSlack = 1e-12;

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  static const double kNorm = 1.0 / std::sqrt(2.0 * M_PI);
  return kNorm * std::exp(-0.5 * x * x);
}

// Composite fixed-order Gauss-Legendre over [a, b] split into `panels`.
template <typename F>
double composite_gauss(F&& f, double a, double b, int panels) {
  using boost::math::quadrature::gauss;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) total += gauss<double, 20>::integrate(f, a + i * h, a + (i + 1) * h);
  return total;
}

// P(range of k iid standard normals <= w).
double range_cdf(double w, std::size_t k) {
  if (w <= 0.0) return 0.0;
  const auto integrand = [w, k](double z) {
    const double inside = standard_normal_cdf(z) - standard_normal_cdf(z - w);
    return normal_pdf(z) * std::pow(std::max(inside, 0.0), static_cast<double>(k - 1));
  };
  const double hi = 8.5 + w;
  const int panels = static_cast<int>(std::ceil((hi + 8.5) / 1.5));
  return std::clamp(static_cast<double>(k) * composite_gauss(integrand, -8.5, hi, panels), 0.0, 1.0);
}

bool is_strict_permutation(std::span<const double> r) {
  std::vector<double> sorted(r.begin(), r.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<double>(i + 1)) return false;
  }
  return true;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_groups(const Groups& groups) {
  if (groups.size() < 2) throw Error(ErrorCode::TooFewGroups, std::to_string(groups.size()));
  for (const auto& [p, values] : groups) {
    if (values.size() < 2) throw Error(ErrorCode::TinyGroup, std::string(to_string(p)));
  }
}

struct Pooled {
  double ss_between = 0.0;
  double ss_within = 0.0;
  std::size_t total = 0;
};

Pooled pooled_sums(const Groups& groups) {
  Pooled out;
  double grand = 0.0;
  for (const auto& [_, v] : groups) {
    grand += std::accumulate(v.begin(), v.end(), 0.0);
    out.total += v.size();
  }
  grand /= static_cast<double>(out.total);
  for (const auto& [_, v] : groups) {
    const double m = mean_of(v);
    out.ss_between += static_cast<double>(v.size()) * (m - grand) * (m - grand);
    for (double x : v) out.ss_within += (x - m) * (x - m);
  }
  return out;
}

// Tukey reports reuse a handful of (k, df) combinations; the quantile costs a
// root search over a double integral.
double cached_quantile(double prob, std::size_t k, double df);

}  // namespace

std::vector<double> fractional_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

RankedList RankedList::from_order(std::string quintuplet_id, std::vector<std::string> order,
                                  std::optional<Position> source) {
  RankedList r;
  r.source_position = source;
  r.quintuplet_id = std::move(quintuplet_id);
  r.ids = std::move(order);
  for (std::size_t i = 0; i < r.ids.size(); ++i) r.ranks.push_back(static_cast<double>(i + 1));
  return r;
}

RankedList RankedList::from_scores(std::string quintuplet_id, std::vector<std::string> ids,
                                   std::span<const double> scores, std::optional<Position> source) {
  if (ids.size() != scores.size()) throw Error(ErrorCode::LengthMismatch, "ids vs scores");
  RankedList r;
  r.source_position = source;
  r.quintuplet_id = std::move(quintuplet_id);
  r.ids = std::move(ids);
  r.ranks = fractional_ranks(scores);
  return r;
}

std::optional<double> RankedList::rank_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return ranks[i];
  }
  return std::nullopt;
}

double rank_correlation(std::span<const double> ra, std::span<const double> rb) {
  if (ra.size() != rb.size()) throw Error(ErrorCode::LengthMismatch, "rank vectors");
  const std::size_t n = ra.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 ranked items");
  if (is_strict_permutation(ra) && is_strict_permutation(rb)) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    const double nn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
  }
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double exact_permutation_p(std::span<const double> ra, std::span<const double> rb) {
  if (ra.size() > 8) throw Error(ErrorCode::InvalidArgument, "exact test limited to n <= 8");
  const double observed = std::abs(rank_correlation(ra, rb));
  std::vector<std::size_t> perm(rb.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> shuffled(rb.size());
  std::size_t extreme = 0, total = 0;
  do {
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = rb[perm[i]];
    if (std::abs(rank_correlation(ra, shuffled)) >= observed - kRhoTieSlack) ++extreme;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

SpearmanResult spearman_rho(const RankedList& a, const RankedList& b) {
  if (a.quintuplet_id != b.quintuplet_id || a.ids.size() != b.ids.size()) {
    throw Error(ErrorCode::MismatchedQuintuplets, a.quintuplet_id + " vs " + b.quintuplet_id);
  }
  std::vector<double> rb;
  rb.reserve(a.ids.size());
  for (const auto& id : a.ids) {
    auto r = b.rank_of(id);
    if (!r) throw Error(ErrorCode::MismatchedQuintuplets, "statement " + id + " missing");
    rb.push_back(*r);
  }
  SpearmanResult out;
  out.n = a.ids.size();
  out.rho = rank_correlation(a.ranks, rb);
  out.p_value = exact_permutation_p(a.ranks, rb);
  return out;
}

Stars stars_for(double p) {
  if (p < 0.001) return Stars::Three;
  if (p < 0.01) return Stars::Two;
  if (p < 0.05) return Stars::One;
  return Stars::NotSignificant;
}

std::string_view to_string(Stars s) noexcept {
  switch (s) {
    case Stars::NotSignificant: return "ns";
    case Stars::One: return "*";
    case Stars::Two: return "**";
    case Stars::Three: return "***";
  }
  return "ns";
}

Agreement aggregate_agreement(std::span<const RankedList> lists_a,
                              std::span<const RankedList> lists_b) {
  std::map<std::string, const RankedList*> by_id;
  for (const auto& b : lists_b) by_id.emplace(b.quintuplet_id, &b);
  Agreement out;
  for (const auto& a : lists_a) {
    auto it = by_id.find(a.quintuplet_id);
    if (it == by_id.end()) continue;
    const SpearmanResult r = spearman_rho(a, *it->second);
    out.per_pair_rho.push_back(r.rho);
    out.per_pair_p.push_back(r.p_value);
  }
  out.pairs = out.per_pair_rho.size();
  if (out.pairs == 0) throw Error(ErrorCode::NoOverlap, "no shared quintuplet ids");
  if (out.pairs < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 paired lists");

  const double m = static_cast<double>(out.pairs);
  out.mean_rho = mean_of(out.per_pair_rho);
  double ss = 0.0;
  for (double r : out.per_pair_rho) ss += (r - out.mean_rho) * (r - out.mean_rho);
  const double sd = std::sqrt(ss / (m - 1.0));
  if (sd == 0.0) {
    out.p_value = out.mean_rho == 0.0 ? 1.0 : 0.0;
  } else {
    out.p_value = t_two_sided_p(out.mean_rho / (sd / std::sqrt(m)), m - 1.0);
  }
  out.stars = stars_for(out.p_value);
  return out;
}

double f_sf(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

double t_two_sided_p(double t, double df) {
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

AnovaResult one_way_anova(const Groups& groups) {
  check_groups(groups);
  const Pooled s = pooled_sums(groups);
  AnovaResult out;
  out.df_between = groups.size() - 1;
  out.df_within = s.total - groups.size();
  if (out.df_within == 0) throw Error(ErrorCode::TinyGroup, "no within-group degrees of freedom");
  const double msb = s.ss_between / static_cast<double>(out.df_between);
  const double msw = s.ss_within / static_cast<double>(out.df_within);
  if (msw == 0.0) {
    out.f_stat = msb == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    out.f_stat = msb / msw;
  }
  out.p_value = f_sf(out.f_stat, static_cast<double>(out.df_between),
                     static_cast<double>(out.df_within));
  return out;
}

double studentized_range_cdf(double q, std::size_t k, double df) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be >= 2");
  if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "df must be positive");
  if (q <= 0.0) return 0.0;
  if (std::isinf(df) || df > 1e6) return range_cdf(q, k);

  // Mix the range distribution over s = sqrt(chi2_df / df).
  boost::math::chi_squared chi(df);
  const double lo = std::sqrt(boost::math::quantile(chi, 1e-15) / df);
  const double hi = std::sqrt(boost::math::quantile(boost::math::complement(chi, 1e-15)) / df);
  const double log_norm =
      0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0);
  const auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double log_density = log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
    return std::exp(log_density) * range_cdf(q * s, k);
  };
  return std::clamp(composite_gauss(integrand, lo, hi, 24), 0.0, 1.0);
}

double studentized_range_quantile(double prob, std::size_t k, double df) {
  if (!(prob > 0.0 && prob < 1.0)) throw Error(ErrorCode::InvalidArgument, "prob must lie in (0,1)");
  const auto f = [&](double q) { return studentized_range_cdf(q, k, df) - prob; };
  double hi = 10.0;
  while (f(hi) < 0.0) hi *= 2.0;
  std::uintmax_t iters = 200;
  const auto [a, b] =
      boost::math::tools::toms748_solve(f, 1e-9, hi, boost::math::tools::eps_tolerance<double>(45), iters);
  return 0.5 * (a + b);
}

namespace {
double cached_quantile(double prob, std::size_t k, double df) {
  static std::mutex mu;
  static std::map<std::tuple<double, std::size_t, double>, double> memo;
  const auto key = std::make_tuple(prob, k, df);
  {
    std::lock_guard lock(mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  const double q = studentized_range_quantile(prob, k, df);
  std::lock_guard lock(mu);
  memo.emplace(key, q);
  return q;
}
}  // namespace

std::vector<TukeyContrast> tukey_hsd(const Groups& groups, double alpha) {
  check_groups(groups);
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
  const Pooled s = pooled_sums(groups);
  const std::size_t k = groups.size();
  const double df = static_cast<double>(s.total - k);
  if (df <= 0.0) throw Error(ErrorCode::TinyGroup, "no within-group degrees of freedom");
  const double msw = s.ss_within / df;
  const double q_crit = cached_quantile(1.0 - alpha, k, df);

  std::vector<TukeyContrast> out;
  for (auto i = groups.begin(); i != groups.end(); ++i) {
    for (auto j = std::next(i); j != groups.end(); ++j) {
      TukeyContrast c;
      c.first = i->first;
      c.second = j->first;
      c.mean_diff = mean_of(j->second) - mean_of(i->second);
      const double se = std::sqrt(0.5 * msw *
                                  (1.0 / static_cast<double>(i->second.size()) +
                                   1.0 / static_cast<double>(j->second.size())));
      c.ci_low = c.mean_diff - q_crit * se;
      c.ci_high = c.mean_diff + q_crit * se;
      if (se == 0.0) {
        c.p_adj = c.mean_diff == 0.0 ? 1.0 : 0.0;
      } else {
        c.p_adj = 1.0 - studentized_range_cdf(std::abs(c.mean_diff) / se, k, df);
      }
      c.significant = c.ci_low > 0.0 || c.ci_high < 0.0;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<AgreementCell> agreement_matrix(std::span<const RankedList> lists_a,
                                            std::span<const RankedList> lists_b) {
  auto group = [](std::span<const RankedList> lists) {
    std::map<Position, std::vector<RankedList>> out;
    for (const auto& l : lists) {
      if (!l.source_position) {
        throw Error(ErrorCode::SchemaViolation, "ranked list " + l.quintuplet_id + " has no source_position");
      }
      out[*l.source_position].push_back(l);
    }
    return out;
  };
  const auto ga = group(lists_a);
  const auto gb = group(lists_b);
  std::vector<AgreementCell> out;
  for (const auto& [pa, la] : ga) {
    for (const auto& [pb, lb] : gb) {
      std::set<std::string> ids_b;
      for (const auto& l : lb) ids_b.insert(l.quintuplet_id);
      std::size_t shared = 0;
      for (const auto& l : la) shared += ids_b.count(l.quintuplet_id);
      if (shared < 2) continue;
      out.push_back({pa, pb, aggregate_agreement(la, lb)});
    }
  }
  return out;
}

std::vector<PositioningReport> positioning_report(std::span<const ScoreSample> samples, double alpha) {
  std::map<std::pair<PositioningTest, Axis>, Groups> cells;
  for (const auto& s : samples) cells[{s.test_name, s.axis}][s.position].push_back(s.value);
  std::vector<PositioningReport> out;
  for (auto& [key, groups] : cells) {
    std::erase_if(groups, [](const auto& g) { return g.second.size() < 2; });
    if (groups.size() < 2) continue;
    PositioningReport r;
    r.test = key.first;
    r.axis = key.second;
    r.anova = one_way_anova(groups);
    r.contrasts = tukey_hsd(groups, alpha);
    out.push_back(std::move(r));
  }
  return out;
}

Json to_json(const AgreementCell& c) {
  Json j;
  j["a"] = std::string(to_string(c.a));
  j["b"] = std::string(to_string(c.b));
  j["mean_rho"] = c.agreement.mean_rho;
  j["p_value"] = c.agreement.p_value;
  j["stars"] = std::string(to_string(c.agreement.stars));
  j["pairs"] = c.agreement.pairs;
  j["per_pair_rho"] = c.agreement.per_pair_rho;
  j["per_pair_p"] = c.agreement.per_pair_p;
  return j;
}

Json to_json(const PositioningReport& r) {
  Json j;
  j["test"] = std::string(to_string(r.test));
  j["axis"] = std::string(to_string(r.axis));
  j["anova"] = {{"f", std::isinf(r.anova.f_stat) ? Json("inf") : Json(r.anova.f_stat)},
                {"df_between", r.anova.df_between},
                {"df_within", r.anova.df_within},
                {"p_value", r.anova.p_value}};
  Json contrasts = Json::array();
  for (const auto& c : r.contrasts) {
    contrasts.push_back({{"first", std::string(to_string(c.first))},
                         {"second", std::string(to_string(c.second))},
                         {"mean_diff", c.mean_diff},
                         {"ci_low", c.ci_low},
                         {"ci_high", c.ci_high},
                         {"p_adj", c.p_adj},
                         {"significant", c.significant}});
  }
  j["tukey"] = contrasts;
  return j;
}

Json to_json(const RankedList& r) {
  Json j;
  j["quintuplet_id"] = r.quintuplet_id;
  if (r.source_position) j["source_position"] = std::string(to_string(*r.source_position));
  j["order"] = r.ids;
  j["ranks"] = r.ranks;
  return j;
}

RankedList ranked_list_from_json(const Json& obj, std::size_t line_no) {
  FieldReader f(obj, line_no);
  f.only({"quintuplet_id", "source_position", "order", "ranks"});
  RankedList r;
  r.quintuplet_id = f.string("quintuplet_id");
  if (auto pos = f.optional_string("source_position")) {
    r.source_position = parse_position(*pos);
    if (!r.source_position) f.fail("source_position", "unknown position label");
  }
  r.ids = f.string_list("order");
  if (r.ids.size() < 2) f.fail("order", "need at least 2 statements");
  std::vector<std::string> sorted = r.ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    f.fail("order", "not a permutation (repeated id)");
  }
  if (obj.contains("ranks")) {
    r.ranks = f.number_list("ranks");
    if (r.ranks.size() != r.ids.size()) f.fail("ranks", "length differs from order");
  } else {
    for (std::size_t i = 0; i < r.ids.size(); ++i) r.ranks.push_back(static_cast<double>(i + 1));
  }
  return r;
}

std::vector<RankedList> load_ranked_lists(const std::filesystem::path& path) {
  std::vector<RankedList> out;
  std::size_t line_no = 0;
  for (const Json& obj : read_json_lines(path)) out.push_back(ranked_list_from_json(obj, ++line_no));
  return out;
}

}  // namespace forge
