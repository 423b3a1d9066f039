#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace proxilab::stats {

class TooFewSamples : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Empirical CDF with a Dvoretzky-Kiefer-Wolfowitz confidence band.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples, double alpha = 0.05);

  /// Fraction of samples <= v.
  double operator()(double v) const;
  /// Band half-width sqrt(ln(2/alpha) / (2n)).
  double epsilon() const { return epsilon_; }
  double lower(double v) const;
  double upper(double v) const;

  const std::vector<double>& samples() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }
  double alpha() const { return alpha_; }

 private:
  std::vector<double> sorted_;
  double alpha_;
  double epsilon_;
};

double dkw_epsilon(std::size_t n, double alpha);

/// U[a, b] fit by sample min and max. Requires at least `min_samples`.
std::pair<double, double> fit_uniform(std::span<const double> samples,
                                      std::size_t min_samples = 20);

/// Two-sided one-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf);

/// Asymptotic p-value for statistic d with n samples (Stephens' correction).
double ks_pvalue(double d, std::size_t n);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool passes(double alpha) const { return p_value > alpha; }
};

KsResult ks_uniform(std::span<const double> samples, double a, double b);

}  // namespace proxilab::stats
