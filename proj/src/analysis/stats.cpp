#include "lbt/analysis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "lbt/core/error.hpp"

namespace lbt::analysis {

namespace {

const boost::math::normal kStdNormal;

double normal_sf(double z) { return boost::math::cdf(boost::math::complement(kStdNormal, z)); }
double normal_cdf(double z) { return boost::math::cdf(kStdNormal, z); }

double p_from_z(double z, Alternative alt) {
  switch (alt) {
    case Alternative::greater: return normal_sf(z);
    case Alternative::less: return normal_cdf(z);
    case Alternative::two_sided: return std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
  }
  return 1.0;
}

// Continuity-corrected z for statistic s with mean mu and sd sigma.
double corrected_z(double s, double mu, double sigma, Alternative alt) {
  if (sigma <= 0.0) return 0.0;
  switch (alt) {
    case Alternative::greater: return (s - mu - 0.5) / sigma;
    case Alternative::less: return (s - mu + 0.5) / sigma;
    case Alternative::two_sided: {
      const double dev = std::max(std::fabs(s - mu) - 0.5, 0.0);
      return (s >= mu ? dev : -dev) / sigma;
    }
  }
  return 0.0;
}

// Sum over tie groups of t^3 - t.
double tie_term(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double t = static_cast<double>(j - i);
    sum += t * t * t - t;
    i = j;
  }
  return sum;
}

// Exact tail probability from a count distribution over integer sums.
double exact_tail(const std::vector<double>& counts, long long observed, long long expected2, Alternative alt) {
  double total = 0.0;
  double hit = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] == 0.0) continue;
    total += counts[s];
    const auto v = static_cast<long long>(s);
    bool in = false;
    switch (alt) {
      case Alternative::greater: in = v >= observed; break;
      case Alternative::less: in = v <= observed; break;
      case Alternative::two_sided: in = std::llabs(2 * v - expected2) >= std::llabs(2 * observed - expected2); break;
    }
    if (in) hit += counts[s];
  }
  return std::min(1.0, hit / total);
}

void require_finite(std::span<const double> xs, std::string_view what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw DomainError(fmt::format("{}: input contains a non-finite value", what));
  }
}

}  // namespace

std::string_view to_string(Alternative a) {
  switch (a) {
    case Alternative::two_sided: return "two-sided";
    case Alternative::less: return "less";
    case Alternative::greater: return "greater";
  }
  return "two-sided";
}

Alternative parse_alternative(std::string_view text) {
  if (text == "two-sided" || text == "two_sided") return Alternative::two_sided;
  if (text == "less") return Alternative::less;
  if (text == "greater") return Alternative::greater;
  throw DomainError(fmt::format("unknown alternative '{}'", text));
}

std::vector<double> midranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && xs[idx[j]] == xs[idx[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

StatReport mann_whitney_u(std::span<const double> xs, std::span<const double> ys, Alternative alt) {
  if (xs.empty() || ys.empty()) throw DomainError("mann_whitney_u: both groups need at least one value");
  require_finite(xs, "mann_whitney_u");
  require_finite(ys, "mann_whitney_u");
  const std::size_t n1 = xs.size();
  const std::size_t n2 = ys.size();
  const std::size_t n = n1 + n2;
  std::vector<double> all(xs.begin(), xs.end());
  all.insert(all.end(), ys.begin(), ys.end());
  const auto ranks = midranks(all);

  const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
  const double u1 = r1 - static_cast<double>(n1 * (n1 + 1)) / 2.0;
  const double u2 = static_cast<double>(n1 * n2) - u1;
  const double mu = static_cast<double>(n1 * n2) / 2.0;
  const double dn = static_cast<double>(n);
  const double var = static_cast<double>(n1 * n2) / 12.0 * ((dn + 1.0) - tie_term(all) / (dn * (dn - 1.0)));
  const double sigma = var > 0.0 ? std::sqrt(var) : 0.0;

  StatReport r;
  r.test = "mann_whitney_u";
  r.statistic = std::min(u1, u2);
  r.n1 = n1;
  r.n2 = n2;
  r.alternative = alt;
  const double z = corrected_z(u1, mu, sigma, alt);
  r.z = z;
  r.p_approx = sigma > 0.0 ? p_from_z(z, alt) : 1.0;
  r.effect_size = z / std::sqrt(dn);
  r.effect_name = "r";

  if (n <= kExactLimit) {
    // Distribution of the doubled rank sum of a random size-n1 subset.
    std::vector<long long> doubled(n);
    long long max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = std::llround(2.0 * ranks[i]);
      max_sum += doubled[i];
    }
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = std::min(i + 1, n1); k >= 1; --k) {
        for (long long s = max_sum; s >= doubled[i]; --s) {
          ways[k][static_cast<std::size_t>(s)] += ways[k - 1][static_cast<std::size_t>(s - doubled[i])];
        }
      }
    }
    long long observed = 0;
    for (std::size_t i = 0; i < n1; ++i) observed += doubled[i];
    const long long expected2 = 2 * static_cast<long long>(n1) * static_cast<long long>(n + 1);
    r.p_exact = exact_tail(ways[n1], observed, expected2, alt);
  }
  r.p_value = r.p_exact.value_or(*r.p_approx);
  return r;
}

StatReport wilcoxon_signed_rank(std::span<const double> xs, std::span<const double> ys, Alternative alt) {
  if (xs.size() != ys.size()) throw DomainError("wilcoxon_signed_rank: paired samples differ in length");
  std::vector<double> d(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) d[i] = xs[i] - ys[i];
  return wilcoxon_signed_rank(d, alt);
}

StatReport wilcoxon_signed_rank(std::span<const double> differences, Alternative alt) {
  require_finite(differences, "wilcoxon_signed_rank");
  std::vector<double> d;
  for (double v : differences) {
    if (v != 0.0) d.push_back(v);
  }
  if (d.empty()) throw DomainError("wilcoxon_signed_rank: all differences are zero");
  const std::size_t n = d.size();
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::fabs(d[i]);
  const auto ranks = midranks(mag);

  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) w_plus += ranks[i];
  }
  const double dn = static_cast<double>(n);
  const double total = dn * (dn + 1.0) / 2.0;
  const double w_minus = total - w_plus;
  const double mu = total / 2.0;
  const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_term(mag) / 48.0;
  const double sigma = var > 0.0 ? std::sqrt(var) : 0.0;

  StatReport r;
  r.test = "wilcoxon_signed_rank";
  r.statistic = alt == Alternative::two_sided ? std::min(w_plus, w_minus) : w_plus;
  r.n1 = n;
  r.n2 = n;
  r.alternative = alt;
  const double z = corrected_z(w_plus, mu, sigma, alt);
  r.z = z;
  r.p_approx = sigma > 0.0 ? p_from_z(z, alt) : 1.0;
  r.effect_size = z / std::sqrt(dn);
  r.effect_name = "r";

  if (n <= kExactLimit) {
    std::vector<long long> doubled(n);
    long long max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = std::llround(2.0 * ranks[i]);
      max_sum += doubled[i];
    }
    std::vector<double> ways(static_cast<std::size_t>(max_sum) + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (long long s = max_sum; s >= doubled[i]; --s) {
        ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - doubled[i])];
      }
    }
    long long observed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] > 0) observed += doubled[i];
    }
    r.p_exact = exact_tail(ways, observed, max_sum, alt);
  }
  r.p_value = r.p_exact.value_or(*r.p_approx);
  return r;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stdev(std::span<const double> xs) {
  if (xs.size() < 2) throw DomainError("standard deviation needs at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("median of an empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : (v[k - 1] + v[k]) / 2.0;
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw DomainError("quantile of an empty sample");
  if (q < 0.0 || q > 1.0) throw DomainError("quantile level must be in [0, 1]");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

struct Pooled {
  double mean_diff;
  double var;
};

Pooled pooled(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2) throw DomainError("each group needs at least two values");
  require_finite(xs, "pooled variance");
  require_finite(ys, "pooled variance");
  const double n1 = static_cast<double>(xs.size());
  const double n2 = static_cast<double>(ys.size());
  const double s1 = stdev(xs);
  const double s2 = stdev(ys);
  const double var = ((n1 - 1.0) * s1 * s1 + (n2 - 1.0) * s2 * s2) / (n1 + n2 - 2.0);
  if (!(var > 0.0)) throw DomainError("pooled variance is zero");
  return {mean(xs) - mean(ys), var};
}

double t_p(double t, double df, Alternative alt) {
  const boost::math::students_t dist(df);
  switch (alt) {
    case Alternative::greater: return boost::math::cdf(boost::math::complement(dist, t));
    case Alternative::less: return boost::math::cdf(dist, t);
    case Alternative::two_sided: return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
  }
  return 1.0;
}

}  // namespace

double cohens_d(std::span<const double> xs, std::span<const double> ys) {
  const auto p = pooled(xs, ys);
  return p.mean_diff / std::sqrt(p.var);
}

StatReport t_test_ind(std::span<const double> xs, std::span<const double> ys, Alternative alt) {
  const auto p = pooled(xs, ys);
  const double n1 = static_cast<double>(xs.size());
  const double n2 = static_cast<double>(ys.size());
  StatReport r;
  r.test = "t_test_ind";
  r.statistic = p.mean_diff / std::sqrt(p.var * (1.0 / n1 + 1.0 / n2));
  r.df = n1 + n2 - 2.0;
  r.p_value = t_p(r.statistic, *r.df, alt);
  r.p_approx = r.p_value;
  r.effect_size = p.mean_diff / std::sqrt(p.var);
  r.effect_name = "d";
  r.n1 = xs.size();
  r.n2 = ys.size();
  r.alternative = alt;
  return r;
}

StatReport spearman_rho(std::span<const double> xs, std::span<const double> ys, Alternative alt) {
  if (xs.size() != ys.size()) throw DomainError("spearman_rho: samples differ in length");
  if (xs.size() < 3) throw DomainError("spearman_rho needs at least three pairs");
  require_finite(xs, "spearman_rho");
  require_finite(ys, "spearman_rho");
  const auto rx = midranks(xs);
  const auto ry = midranks(ys);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("spearman_rho: constant input");
  const double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(xs.size()) - 2.0;

  StatReport r;
  r.test = "spearman_rho";
  r.statistic = rho;
  r.df = df;
  if (std::fabs(rho) >= 1.0) {
    const bool against = (alt == Alternative::greater && rho < 0) || (alt == Alternative::less && rho > 0);
    r.p_value = against ? 1.0 : 0.0;
  } else {
    r.p_value = t_p(rho * std::sqrt(df / ((1.0 - rho) * (1.0 + rho))), df, alt);
  }
  r.p_approx = r.p_value;
  r.effect_size = rho;
  r.effect_name = "rho";
  r.n1 = xs.size();
  r.n2 = ys.size();
  r.alternative = alt;
  return r;
}

namespace {

double poly(std::span<const double> c, double x) {
  double result = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) result = result * x + c[i];
  return result;
}

}  // namespace

StatReport shapiro_wilk(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 3 || n > 50) throw DomainError(fmt::format("shapiro_wilk needs 3 <= n <= 50, got {}", n));
  require_finite(xs, "shapiro_wilk");
  std::vector<double> x(xs.begin(), xs.end());
  std::sort(x.begin(), x.end());
  if (x.back() - x.front() < 1e-19 * std::max(1.0, std::fabs(x.back()))) {
    throw DomainError("shapiro_wilk: constant input");
  }

  static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static constexpr double g[] = {-2.273, 0.459};
  static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};

  const std::size_t half = n / 2;
  const double an = static_cast<double>(n);
  // a[i] weights the i-th largest minus the i-th smallest order statistic.
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      a[i] = boost::math::quantile(kStdNormal, (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      summ2 += a[i] * a[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, rsn) - a[0] / ssumm2;
    std::size_t first = 1;
    double fac = 0.0;
    if (n > 5) {
      first = 2;
      const double a2 = -a[1] / ssumm2 + poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] /= -fac;
  }

  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  double num = 0.0;
  double asq = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    num += a[i] * (x[n - 1 - i] - x[i]);
    asq += 2.0 * a[i] * a[i];
  }
  const double w = std::min(1.0, num * num / (asq * ss));

  const double p = [&] {
    if (n == 3) {
      constexpr double pi = 3.14159265358979323846;
      return std::max(0.0, 6.0 / pi * (std::asin(std::sqrt(w)) - pi / 3.0));
    }
    double y = std::log1p(-w);
    double mu = 0.0;
    double s = 1.0;
    if (n <= 11) {
      const double gamma = poly(g, an);
      if (y >= gamma) return 1e-99;
      y = -std::log(gamma - y);
      mu = poly(c3, an);
      s = std::exp(poly(c4, an));
    } else {
      const double ln = std::log(an);
      mu = poly(c5, ln);
      s = std::exp(poly(c6, ln));
    }
    return normal_sf((y - mu) / s);
  }();

  StatReport r;
  r.test = "shapiro_wilk";
  r.statistic = w;
  r.p_value = p;
  r.p_approx = p;
  r.n1 = n;
  return r;
}

}  // namespace lbt::analysis
