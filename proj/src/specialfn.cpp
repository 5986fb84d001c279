#include "freqbin/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace freqbin {

namespace {

constexpr double kSeriesLimit = 1.0;
constexpr double kRescaleAbove = 1e250;

// J_n(x) by direct summation; accurate for |x| <= kSeriesLimit.
double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) {
    term *= half / k;
  }
  if (term == 0.0) {
    return 0.0;
  }
  double sum = term;
  const double q = -half * half;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) {
      break;
    }
  }
  return sum;
}

// Backward recurrence from a high even order, normalized by
// J_0 + 2 sum_k J_{2k} = 1. Requires x > 0.
std::vector<double> bessel_miller(int max_order, double x) {
  const int ref = std::max(max_order, static_cast<int>(std::ceil(x)));
  int start = ref + 20 + static_cast<int>(std::sqrt(50.0 * ref));
  start += start % 2;

  std::vector<double> v(static_cast<std::size_t>(start) + 2, 0.0);
  v[start] = 1.0;
  const double two_over_x = 2.0 / x;
  for (int k = start; k >= 1; --k) {
    v[k - 1] = two_over_x * k * v[k] - v[k + 1];
    if (std::abs(v[k - 1]) > kRescaleAbove) {
      for (int i = k - 1; i <= start; ++i) {
        v[i] /= kRescaleAbove;
      }
    }
  }

  double norm = v[0];
  for (int k = 2; k <= start; k += 2) {
    norm += 2.0 * v[k];
  }
  v.resize(static_cast<std::size_t>(max_order) + 1);
  for (double& value : v) {
    value /= norm;
  }
  return v;
}

void check_domain(double x) {
  if (!std::isfinite(x) || std::abs(x) > kBesselDomain) {
    throw std::domain_error("bessel_j: |x| = " + std::to_string(std::abs(x)) +
                            " outside validated domain [0, " +
                            std::to_string(kBesselDomain) + "]");
  }
}

}  // namespace

void TruncationPolicy::validate() const {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("truncation epsilon must be positive");
  }
  if (max_order < 1) {
    throw std::invalid_argument("truncation max_order must be >= 1");
  }
}

TruncationError::TruncationError(double residual, int max_order)
    : std::runtime_error("Bessel tail not below tolerance at max_order " +
                         std::to_string(max_order) +
                         " (residual sum of squares " +
                         std::to_string(residual) + ")"),
      residual_(residual) {}

std::vector<double> bessel_j_sequence(int max_order, double x) {
  check_domain(x);
  if (max_order < 0) {
    throw std::invalid_argument("bessel_j_sequence: negative max_order");
  }
  const double ax = std::abs(x);
  std::vector<double> out;
  if (ax == 0.0) {
    out.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
    out[0] = 1.0;
  } else if (ax <= kSeriesLimit) {
    out.reserve(static_cast<std::size_t>(max_order) + 1);
    for (int n = 0; n <= max_order; ++n) {
      out.push_back(bessel_series(n, ax));
    }
  } else {
    out = bessel_miller(max_order, ax);
  }
  if (x < 0.0) {
    for (std::size_t n = 1; n < out.size(); n += 2) {
      out[n] = -out[n];
    }
  }
  return out;
}

double bessel_j(int order, double x) {
  check_domain(x);
  const int n = std::abs(order);
  double value = 0.0;
  const double ax = std::abs(x);
  if (ax == 0.0) {
    value = n == 0 ? 1.0 : 0.0;
  } else if (ax <= kSeriesLimit) {
    value = bessel_series(n, ax);
  } else {
    value = bessel_miller(n, ax)[n];
  }
  // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
  const bool odd = (n % 2) != 0;
  const int flips = (odd && order < 0 ? 1 : 0) + (odd && x < 0.0 ? 1 : 0);
  return flips == 1 ? -value : value;
}

int truncation_order(double c, const TruncationPolicy& policy) {
  policy.validate();
  if (!(c >= 0.0)) {
    throw std::invalid_argument("truncation_order: amplitude must be >= 0");
  }
  const int top =
      std::max(policy.max_order, static_cast<int>(std::ceil(c))) + 40;
  const std::vector<double> j = bessel_j_sequence(top, c);

  // tail[P] = sum_{|p|>P} J_p^2, accumulated from the top to avoid
  // cancellation in 1 - sum.
  std::vector<double> tail(j.size(), 0.0);
  for (int p = top - 1; p >= 0; --p) {
    tail[p] = tail[p + 1] + 2.0 * j[p + 1] * j[p + 1];
  }
  const double target = policy.epsilon * policy.epsilon;
  for (int p = 0; p <= policy.max_order; ++p) {
    if (tail[p] <= target) {
      return p;
    }
  }
  throw TruncationError(tail[policy.max_order], policy.max_order);
}

double jacobi_anger_residual(double c, double theta, int order_cap) {
  if (!(c >= 0.0)) {
    throw std::invalid_argument("jacobi_anger_residual: amplitude must be >= 0");
  }
  const int cap = std::max(order_cap, 0);
  const std::vector<double> j = bessel_j_sequence(cap, c);
  const double shifted = theta - std::numbers::pi / 2.0;

  std::complex<double> sum = j[0];
  for (int p = 1; p <= cap; ++p) {
    const double sign = (p % 2 == 0) ? 1.0 : -1.0;
    sum += j[p] * std::polar(1.0, p * shifted);
    sum += sign * j[p] * std::polar(1.0, -p * shifted);
  }
  return std::abs(std::polar(1.0, -c * std::cos(theta)) - sum);
}

}  // namespace freqbin
