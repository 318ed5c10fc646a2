#include "glomkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glomkit/special.hpp"

namespace glomkit::stats {

namespace {

double poly(std::span<const double> c, double x) {
  double r = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
  return r;
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (n < 3) throw SampleTooSmall("shapiro_wilk: n < 3");
  if (n > 5000) throw SampleTooSmall("shapiro_wilk: n > 5000");

  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  if (v.front() == v.back())
    throw ConstantSample("shapiro_wilk: all values equal");

  // Expected normal order statistics (Blom) and Royston's coefficient
  // corrections for the two largest weights.
  std::vector<double> m(n);
  double ssq_m = 0.0;
  for (int i = 0; i < n; ++i) {
    m[i] = special::normal_ppf((i + 1 - 0.375) / (n + 0.25));
    ssq_m += m[i] * m[i];
  }
  std::vector<double> a(n, 0.0);
  double w_stat;
  if (n == 3) {
    a[0] = -(a[2] = std::sqrt(0.5));
  } else {
    const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
    constexpr double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    constexpr double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    const double an = m[n - 1] / std::sqrt(ssq_m) + poly(c1, rsn);
    double phi;
    if (n > 5) {
      const double an1 = m[n - 2] / std::sqrt(ssq_m) + poly(c2, rsn);
      phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
            (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
      a[n - 1] = an;
      a[n - 2] = an1;
      a[0] = -an;
      a[1] = -an1;
      for (int i = 2; i < n - 2; ++i) a[i] = m[i] / std::sqrt(phi);
    } else {
      phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
      a[n - 1] = an;
      a[0] = -an;
      for (int i = 1; i < n - 1; ++i) a[i] = m[i] / std::sqrt(phi);
    }
  }

  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += a[i] * v[i];
    den += (v[i] - mean) * (v[i] - mean);
  }
  w_stat = num * num / den;
  if (w_stat > 1.0) w_stat = 1.0;

  ShapiroWilkResult r;
  r.w = w_stat;
  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;    // 6/pi
    constexpr double stqr = 1.04719755119660;   // asin(sqrt(3/4))
    r.p = pi6 * (std::asin(std::sqrt(w_stat)) - stqr);
    r.p = std::clamp(r.p, 0.0, 1.0);
    return r;
  }
  double z;
  if (n <= 11) {
    constexpr double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    constexpr double c4[4] = {1.3822, -0.77857, 0.062767, -2.0322e-3};
    const double gamma = -2.273 + 0.459 * n;
    const double w1 = -std::log(gamma - std::log1p(-w_stat));
    z = (w1 - poly(c3, static_cast<double>(n))) /
        std::exp(poly(c4, static_cast<double>(n)));
  } else {
    constexpr double c5[4] = {-1.5861, -0.31082, -0.083751, 3.8915e-3};
    constexpr double c6[3] = {-0.4803, -0.082676, 3.0302e-3};
    const double u = std::log(static_cast<double>(n));
    z = (std::log1p(-w_stat) - poly(c5, u)) / std::exp(poly(c6, u));
  }
  r.p = special::normal_sf(z);
  return r;
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw EmptySample("ks_two_sample: empty sample");
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());

  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double t = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == t) ++i;
    while (j < ys.size() && ys[j] == t) ++j;
    const double gap = std::fabs(static_cast<double>(i) / nx -
                                 static_cast<double>(j) / ny);
    d = std::max(d, gap);
  }
  // Once one sample is exhausted the remaining gaps only shrink toward
  // |1 - 1| except at the crossing already covered; the max of the two
  // terminal gaps closes the sweep.
  d = std::max(d, std::fabs(static_cast<double>(i) / nx -
                            static_cast<double>(j) / ny));

  KsResult r;
  r.d = d;
  const double ne = nx * ny / (nx + ny);
  r.p = special::kolmogorov_q(std::sqrt(ne) * d);
  return r;
}

std::vector<double> mid_ranks(std::span<const double> pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

struct PooledRanks {
  std::vector<double> ranks;       // pooled mid-ranks
  std::vector<std::size_t> sizes;  // per group
  double tie_sum = 0.0;            // sum of t^3 - t over tie groups
  std::size_t total = 0;
};

PooledRanks pool_and_rank(const std::vector<Sample>& groups) {
  PooledRanks pr;
  std::vector<double> pooled;
  for (const Sample& g : groups) {
    if (g.values.empty()) throw EmptySample("rank test: empty group");
    pr.sizes.push_back(g.values.size());
    pooled.insert(pooled.end(), g.values.begin(), g.values.end());
  }
  pr.total = pooled.size();
  pr.ranks = mid_ranks(pooled);

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    pr.tie_sum += t * t * t - t;
    i = j + 1;
  }
  return pr;
}

}  // namespace

KruskalWallisResult kruskal_wallis(const std::vector<Sample>& groups) {
  if (groups.size() < 2)
    throw ValidationError("kruskal_wallis: need at least 2 groups");
  const PooledRanks pr = pool_and_rank(groups);
  const double n = static_cast<double>(pr.total);
  if (pr.total < 3) throw SampleTooSmall("kruskal_wallis: total n < 3");

  KruskalWallisResult r;
  const double tie_correction = 1.0 - pr.tie_sum / (n * n * n - n);
  if (tie_correction <= 0.0) {  // all pooled values equal
    r.h = 0.0;
    r.p = 1.0;
    r.eps2 = 0.0;
    return r;
  }

  double h = 0.0;
  std::size_t offset = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    double rank_sum = 0.0;
    for (std::size_t k = 0; k < pr.sizes[gi]; ++k) rank_sum += pr.ranks[offset + k];
    h += rank_sum * rank_sum / static_cast<double>(pr.sizes[gi]);
    offset += pr.sizes[gi];
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
  h /= tie_correction;
  if (h < 0.0) h = 0.0;

  r.h = h;
  r.p = special::chi2_sf(h, static_cast<double>(groups.size() - 1));
  r.eps2 = std::clamp(h / (n - 1.0), 0.0, 1.0);
  return r;
}

DunnResult dunn_posthoc(const std::vector<Sample>& groups) {
  const std::size_t k = groups.size();
  if (k < 3) throw FewerThanThreeGroups("dunn_posthoc: need at least 3 groups");
  const PooledRanks pr = pool_and_rank(groups);
  const double n = static_cast<double>(pr.total);

  std::vector<double> mean_rank(k);
  std::size_t offset = 0;
  for (std::size_t gi = 0; gi < k; ++gi) {
    double sum = 0.0;
    for (std::size_t m = 0; m < pr.sizes[gi]; ++m) sum += pr.ranks[offset + m];
    mean_rank[gi] = sum / static_cast<double>(pr.sizes[gi]);
    offset += pr.sizes[gi];
  }

  // Tie-corrected variance term of the rank differences.
  const double sigma2 = n * (n + 1.0) / 12.0 - pr.tie_sum / (12.0 * (n - 1.0));
  const double m_comparisons = static_cast<double>(k * (k - 1) / 2);

  DunnResult r;
  r.z = MatrixXd::Zero(k, k);
  r.p_raw = MatrixXd::Ones(k, k);
  r.p_adjusted = MatrixXd::Ones(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double se = std::sqrt(
          sigma2 * (1.0 / static_cast<double>(pr.sizes[i]) +
                    1.0 / static_cast<double>(pr.sizes[j])));
      const double z = se > 0.0 ? (mean_rank[i] - mean_rank[j]) / se : 0.0;
      const double p = 2.0 * special::normal_sf(std::fabs(z));
      const double adj = std::min(1.0, p * m_comparisons);
      r.z(i, j) = z;
      r.z(j, i) = -z;
      r.p_raw(i, j) = r.p_raw(j, i) = std::min(1.0, p);
      r.p_adjusted(i, j) = r.p_adjusted(j, i) = adj;
    }
  }
  return r;
}

Stars significance_stars(double p) {
  if (p < 0.001) return Stars::three;
  if (p < 0.01) return Stars::two;
  if (p < 0.05) return Stars::one;
  return Stars::ns;
}

std::string to_string(Stars s) {
  switch (s) {
    case Stars::three: return "***";
    case Stars::two: return "**";
    case Stars::one: return "*";
    default: return "ns";
  }
}

}  // namespace glomkit::stats
