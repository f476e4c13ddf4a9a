#include "rwre/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>

#include "rwre/error.hpp"
#include "rwre/rng.hpp"

namespace rwre::stats {

double compensated_sum(std::span<const double> x) {
  double s = 0.0;
  double c = 0.0;
  for (double v : x) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + c;
}

Moments moments(std::span<const double> x) {
  Moments m;
  m.n = x.size();
  if (m.n == 0) return m;
  const double n = static_cast<double>(m.n);
  m.mean = compensated_sum(x) / n;
  std::vector<double> d2(m.n), d3(m.n), d4(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    const double d = x[i] - m.mean;
    d2[i] = d * d;
    d3[i] = d2[i] * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = compensated_sum(d2) / n;
  const double m3 = compensated_sum(d3) / n;
  const double m4 = compensated_sum(d4) / n;
  if (m.n < 2) return m;
  m.var = m2 * n / (n - 1.0);
  m.seMean = std::sqrt(m.var / n);
  m.seVar = std::sqrt(std::max(0.0, (m4 - m2 * m2) / n));
  if (m2 > 0.0) {
    m.skew = m3 / std::pow(m2, 1.5);
    m.exKurt = m4 / (m2 * m2) - 3.0;
  }
  if (m.n > 3) {
    m.seSkew = std::sqrt(6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0)));
    m.seKurt = 2.0 * m.seSkew * std::sqrt((n * n - 1.0) / ((n - 3.0) * (n + 5.0)));
  }
  return m;
}

double covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("covariance: samples differ in length");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mx = compensated_sum(x) / static_cast<double>(n);
  const double my = compensated_sum(y) / static_cast<double>(n);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = (x[i] - mx) * (y[i] - my);
  return compensated_sum(p) / static_cast<double>(n - 1);
}

double covariance_se(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mx = compensated_sum(x) / static_cast<double>(n);
  const double my = compensated_sum(y) / static_cast<double>(n);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = (x[i] - mx) * (y[i] - my);
  const Moments mp = moments(p);
  return std::sqrt(mp.var / static_cast<double>(n));
}

Interval bootstrap(std::size_t M, const std::function<double(std::span<const std::size_t>)>& stat,
                   std::size_t B, std::uint64_t seed, double level) {
  if (M == 0 || B == 0) throw Error("bootstrap needs M > 0 and B > 0");
  std::vector<std::size_t> idx(M);
  for (std::size_t i = 0; i < M; ++i) idx[i] = i;
  Interval out;
  out.estimate = stat(idx);
  std::vector<double> reps(B);
  for (std::size_t b = 0; b < B; ++b) {
    CounterRng rng(stream_key(seed, b, 0xb007));
    for (std::size_t i = 0; i < M; ++i)
      idx[i] = static_cast<std::size_t>(rng.uniform() * static_cast<double>(M));
    reps[b] = stat(idx);
  }
  std::sort(reps.begin(), reps.end());
  const double alpha = 0.5 * (1.0 - level);
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(B - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return i + 1 < B ? reps[i] * (1.0 - f) + reps[i + 1] * f : reps[i];
  };
  out.lo = q(alpha);
  out.hi = q(1.0 - alpha);
  return out;
}

TestResult chi_square_two_sample(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  if (a.empty() || b.empty()) throw Error("chi-square test needs two non-empty samples");
  std::map<std::int64_t, std::pair<double, double>> counts;
  for (auto v : a) counts[v].first += 1.0;
  for (auto v : b) counts[v].second += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double N = na + nb;

  // Merge adjacent categories (from the top down) until expectations are >= 5.
  std::vector<std::pair<double, double>> bins;
  std::pair<double, double> acc{0.0, 0.0};
  for (auto it = counts.rbegin(); it != counts.rend(); ++it) {
    acc.first += it->second.first;
    acc.second += it->second.second;
    const double tot = acc.first + acc.second;
    if (tot * std::min(na, nb) / N >= 5.0) {
      bins.push_back(acc);
      acc = {0.0, 0.0};
    }
  }
  if (acc.first + acc.second > 0.0) {
    if (bins.empty())
      bins.push_back(acc);
    else {
      bins.back().first += acc.first;
      bins.back().second += acc.second;
    }
  }
  TestResult r;
  if (bins.size() < 2) return r;
  for (const auto& [ca, cb] : bins) {
    const double tot = ca + cb;
    const double ea = tot * na / N;
    const double eb = tot * nb / N;
    r.statistic += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
  }
  r.dof = static_cast<double>(bins.size() - 1);
  r.pValue = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
  return r;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

TestResult ks_normal(std::span<const double> x, double mean, double sd) {
  if (x.empty() || !(sd > 0.0)) throw Error("KS test needs data and sd > 0");
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double D = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = 0.5 * std::erfc(-(v[i] - mean) / (sd * std::sqrt(2.0)));
    D = std::max({D, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  TestResult r;
  r.statistic = D;
  const double sn = std::sqrt(n);
  r.pValue = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * D);
  return r;
}

Regression regression(std::span<const double> x, std::span<const double> y,
                      std::span<const double> se, double level) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n || (!se.empty() && se.size() != n))
    throw Error("regression needs at least three matching points");
  std::vector<double> w(n, 1.0);
  if (!se.empty())
    for (std::size_t i = 0; i < n; ++i) w[i] = se[i] > 0.0 ? 1.0 / (se[i] * se[i]) : 1.0;
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  Regression r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    rss += w[i] * e * e;
  }
  const double dof = static_cast<double>(n - 2);
  r.seSlope = std::sqrt(rss / dof / sxx);
  const double t = boost::math::quantile(boost::math::students_t(dof), 0.5 + 0.5 * level);
  r.lo = r.slope - t * r.seSlope;
  r.hi = r.slope + t * r.seSlope;
  return r;
}

Autocorrelation lag1_autocorrelation(std::span<const double> x) {
  Autocorrelation a;
  const std::size_t n = x.size();
  if (n < 3) return a;
  const double mean = compensated_sum(x) / static_cast<double>(n);
  std::vector<double> num(n - 1), den(n);
  for (std::size_t i = 0; i < n; ++i) den[i] = (x[i] - mean) * (x[i] - mean);
  for (std::size_t i = 0; i + 1 < n; ++i) num[i] = (x[i] - mean) * (x[i + 1] - mean);
  const double d = compensated_sum(den);
  a.r = d > 0.0 ? compensated_sum(num) / d : 0.0;
  a.se = 1.0 / std::sqrt(static_cast<double>(n));
  return a;
}

}  // namespace rwre::stats
