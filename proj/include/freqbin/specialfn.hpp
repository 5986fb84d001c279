#pragma once

// Integer-order Bessel functions of the first kind and the Jacobi-Anger
// tail machinery used to truncate modulator kernels.

#include <stdexcept>
#include <string>
#include <vector>

namespace freqbin {

/// Largest |x| for which bessel_j is validated to 1e-12 absolute error.
inline constexpr double kBesselDomain = 50.0;

struct TruncationPolicy {
  double epsilon = 1e-12;  // amplitude tolerance on the discarded tail
  int max_order = 64;

  void validate() const;
};

/// Thrown when the tail sum is still above epsilon^2 at max_order.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(double residual, int max_order);

  /// Sum of J_p(c)^2 over |p| > max_order.
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// J_order(x) for any integer order and |x| <= kBesselDomain.
/// Power series for small |x|, normalized backward recurrence otherwise.
/// Throws std::domain_error outside the validated domain.
double bessel_j(int order, double x);

/// J_0(x) .. J_max_order(x) from a single backward-recurrence pass.
std::vector<double> bessel_j_sequence(int max_order, double x);

/// Smallest P with sum_{|p|>P} J_p(c)^2 <= epsilon^2.
int truncation_order(double c, const TruncationPolicy& policy = {});

/// |exp(-i c cos(theta)) - sum_{|p|<=order_cap} J_p(c) exp(i p (theta - pi/2))|
double jacobi_anger_residual(double c, double theta, int order_cap);

}  // namespace freqbin
