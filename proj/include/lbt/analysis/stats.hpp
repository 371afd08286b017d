#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lbt::analysis {

enum class Alternative { two_sided, less, greater };

std::string_view to_string(Alternative a);
Alternative parse_alternative(std::string_view text);

struct StatReport {
  std::string test;
  double statistic = 0.0;
  std::optional<double> z;
  std::optional<double> df;
  double p_value = 1.0;  // exact when available, otherwise approximate
  std::optional<double> p_exact;
  std::optional<double> p_approx;
  std::optional<double> effect_size;
  std::string effect_name;  // "r", "d" or "rho"
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  Alternative alternative = Alternative::two_sided;
};

// Average (mid) ranks, 1-based, in input order.
std::vector<double> midranks(std::span<const double> xs);

// Largest combined sample size (Mann-Whitney) or number of nonzero
// differences (Wilcoxon) for which exact p-values are computed.
inline constexpr std::size_t kExactLimit = 12;

// U = min(U1, U2), where U1 counts pairs with x above y. z comes from U1 with
// tie and continuity corrections, so z > 0 when xs tend to exceed ys;
// r = z / sqrt(n1 + n2).
StatReport mann_whitney_u(std::span<const double> xs, std::span<const double> ys,
                          Alternative alt = Alternative::two_sided);

// Paired test on d = x - y. Zero differences are dropped. The statistic is
// min(W+, W-) for two-sided tests and W+ otherwise; z comes from W+ with tie
// and continuity corrections; r = z / sqrt(n).
StatReport wilcoxon_signed_rank(std::span<const double> xs, std::span<const double> ys,
                                Alternative alt = Alternative::two_sided);
StatReport wilcoxon_signed_rank(std::span<const double> differences, Alternative alt = Alternative::two_sided);

// Pooled-variance Student t-test; effect size is cohens_d.
StatReport t_test_ind(std::span<const double> xs, std::span<const double> ys,
                      Alternative alt = Alternative::two_sided);
// (mean(xs) - mean(ys)) / pooled sd.
double cohens_d(std::span<const double> xs, std::span<const double> ys);

// Pearson correlation of midranks; p from the t approximation with n - 2 df.
StatReport spearman_rho(std::span<const double> xs, std::span<const double> ys,
                        Alternative alt = Alternative::two_sided);

// W and Royston's approximate p-value, 3 <= n <= 50.
StatReport shapiro_wilk(std::span<const double> xs);

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1 denominator).
double stdev(std::span<const double> xs);
// Standard sample median (mean of the middle pair for even n).
double median(std::span<const double> xs);
// Linear-interpolation quantile, q in [0, 1].
double quantile(std::span<const double> xs, double q);

}  // namespace lbt::analysis
