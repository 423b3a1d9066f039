#include "proxilab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace proxilab::stats {

double dkw_epsilon(std::size_t n, double alpha) {
  if (n == 0) throw TooFewSamples("empty sample");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

Ecdf::Ecdf(std::vector<double> samples, double alpha)
    : sorted_(std::move(samples)), alpha_(alpha) {
  if (sorted_.empty()) throw TooFewSamples("ECDF needs at least one sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  std::sort(sorted_.begin(), sorted_.end());
  epsilon_ = dkw_epsilon(sorted_.size(), alpha_);
}

double Ecdf::operator()(double v) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), v);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double Ecdf::lower(double v) const { return std::max(0.0, (*this)(v) - epsilon_); }
double Ecdf::upper(double v) const { return std::min(1.0, (*this)(v) + epsilon_); }

std::pair<double, double> fit_uniform(std::span<const double> samples, std::size_t min_samples) {
  if (samples.size() < min_samples || samples.empty()) {
    throw TooFewSamples("uniform fit needs at least " + std::to_string(min_samples) +
                        " samples");
  }
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  return {*lo, *hi};
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw TooFewSamples("KS test needs samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  // Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_uniform(std::span<const double> samples, double a, double b) {
  if (!(b > a)) throw std::invalid_argument("uniform support must have b > a");
  KsResult r;
  r.statistic = ks_statistic(samples, [a, b](double v) {
    return std::clamp((v - a) / (b - a), 0.0, 1.0);
  });
  r.p_value = ks_pvalue(r.statistic, samples.size());
  return r;
}

}  // namespace proxilab::stats
