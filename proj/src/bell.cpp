#include "freqbin/bell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqbin/specialfn.hpp"
#include "parallel.hpp"

namespace freqbin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Params = std::array<double, 8>;  // a0, a1, b0, b1, alpha0, alpha1, beta0, beta1

SettingQuad quad_from_params(const Params& x, double bound) {
  auto amp = [bound](double v) { return std::min(std::abs(v), bound); };
  return {{amp(x[0]), x[4]}, {amp(x[1]), x[5]}, {amp(x[2]), x[6]},
          {amp(x[3]), x[7]}};
}

Params params_from_quad(const SettingQuad& q) {
  return {q.a0.amplitude(), q.a1.amplitude(), q.b0.amplitude(),
          q.b1.amplitude(), q.a0.phase(),     q.a1.phase(),
          q.b0.phase(),     q.b1.phase()};
}

struct Simplex {
  std::array<Params, 9> vertices;
  std::array<double, 9> values;  // objective to minimize
};

// Plain Nelder-Mead minimization; returns the best vertex.
template <class Objective>
Params nelder_mead(const Objective& f, Params start, double amp_step,
                   double phase_step) {
  constexpr int kDim = 8;
  constexpr int kMaxEvaluations = 40000;
  constexpr int kRounds = 3;

  for (int round = 0; round < kRounds; ++round) {
    Simplex s;
    s.vertices[0] = start;
    for (int i = 0; i < kDim; ++i) {
      s.vertices[i + 1] = start;
      s.vertices[i + 1][i] += i < 4 ? amp_step : phase_step;
    }
    for (int i = 0; i <= kDim; ++i) {
      s.values[i] = f(s.vertices[i]);
    }

    std::array<int, 9> order{};
    int evaluations = kDim + 1;
    while (evaluations < kMaxEvaluations) {
      for (int i = 0; i <= kDim; ++i) {
        order[i] = i;
      }
      std::sort(order.begin(), order.end(),
                [&](int l, int r) { return s.values[l] < s.values[r]; });
      const int best = order[0];
      const int worst = order[kDim];
      const int second_worst = order[kDim - 1];

      double size = 0.0;
      for (int i = 0; i <= kDim; ++i) {
        for (int k = 0; k < kDim; ++k) {
          size = std::max(size, std::abs(s.vertices[i][k] - s.vertices[best][k]));
        }
      }
      if (s.values[worst] - s.values[best] < 1e-14 && size < 1e-9) {
        break;
      }

      Params centroid{};
      for (int i = 0; i <= kDim; ++i) {
        if (i == worst) continue;
        for (int k = 0; k < kDim; ++k) centroid[k] += s.vertices[i][k] / kDim;
      }
      auto along = [&](double t) {
        Params p;
        for (int k = 0; k < kDim; ++k) {
          p[k] = centroid[k] + t * (s.vertices[worst][k] - centroid[k]);
        }
        return p;
      };

      const Params reflected = along(-1.0);
      const double f_reflected = f(reflected);
      ++evaluations;
      if (f_reflected < s.values[best]) {
        const Params expanded = along(-2.0);
        const double f_expanded = f(expanded);
        ++evaluations;
        if (f_expanded < f_reflected) {
          s.vertices[worst] = expanded;
          s.values[worst] = f_expanded;
        } else {
          s.vertices[worst] = reflected;
          s.values[worst] = f_reflected;
        }
        continue;
      }
      if (f_reflected < s.values[second_worst]) {
        s.vertices[worst] = reflected;
        s.values[worst] = f_reflected;
        continue;
      }
      const bool outside = f_reflected < s.values[worst];
      const Params contracted = along(outside ? -0.5 : 0.5);
      const double f_contracted = f(contracted);
      ++evaluations;
      if (f_contracted < std::min(f_reflected, s.values[worst])) {
        s.vertices[worst] = contracted;
        s.values[worst] = f_contracted;
        continue;
      }
      for (int i = 0; i <= kDim; ++i) {
        if (i == best) continue;
        for (int k = 0; k < kDim; ++k) {
          s.vertices[i][k] =
              s.vertices[best][k] + 0.5 * (s.vertices[i][k] - s.vertices[best][k]);
        }
        s.values[i] = f(s.vertices[i]);
        ++evaluations;
      }
    }
    const auto it = std::min_element(s.values.begin(), s.values.end());
    start = s.vertices[static_cast<std::size_t>(it - s.values.begin())];
    amp_step *= 0.1;
    phase_step *= 0.1;
  }
  return start;
}

}  // namespace

SettingQuad SettingQuad::symmetric(double c, double gamma) {
  const ModulationSetting low(c, gamma);
  const ModulationSetting high(3.0 * c, gamma + std::numbers::pi);
  return {low, high, low, high};
}

SettingQuad SettingQuad::gauge_normalized() const {
  const double g = a0.phase();
  return {{a0.amplitude(), a0.phase() - g},
          {a1.amplitude(), a1.phase() - g},
          {b0.amplitude(), b0.phase() - g},
          {b1.amplitude(), b1.phase() - g}};
}

double chsh_combination(std::span<const double, 4> e) {
  return e[0] + e[1] + e[2] - e[3];
}

ChshReport chsh_ideal(const SettingQuad& quad) {
  ChshReport report;
  for (std::size_t k = 0; k < kSettingPairs.size(); ++k) {
    const auto [i, j] = kSettingPairs[k];
    report.drives[k] = effective_drive(quad.alice(i), quad.bob(j));
    report.correlators[k] = ideal_probabilities(report.drives[k]).correlator();
  }
  report.s_value = chsh_combination(report.correlators);
  return report;
}

double symmetric_chsh(double c) {
  return 3.0 * bessel_j(0, 4.0 * c) - bessel_j(0, 12.0 * c);
}

SymmetricOptimum optimize_symmetric(double lo, double hi, double tolerance) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) {
    throw std::invalid_argument("optimize_symmetric: interval must lie in [0, 1]");
  }
  if (!(tolerance >= 1e-6)) {
    throw std::invalid_argument("optimize_symmetric: tolerance must be >= 1e-6");
  }

  // Coarse scan to bracket the global maximum, then golden-section inside.
  constexpr int kScan = 200;
  const double h = (hi - lo) / kScan;
  int best = 0;
  double best_value = symmetric_chsh(lo);
  for (int k = 1; k <= kScan; ++k) {
    const double v = symmetric_chsh(lo + k * h);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  double left = lo + std::max(best - 1, 0) * h;
  double right = lo + std::min(best + 1, kScan) * h;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  // Iterate well past the requested tolerance; evaluations are cheap.
  const double stop = std::min(tolerance, 1e-9);
  double x1 = right - inv_phi * (right - left);
  double x2 = left + inv_phi * (right - left);
  double f1 = symmetric_chsh(x1);
  double f2 = symmetric_chsh(x2);
  while (right - left > stop) {
    if (f1 < f2) {
      left = x1;
      x1 = x2;
      f1 = f2;
      x2 = left + inv_phi * (right - left);
      f2 = symmetric_chsh(x2);
    } else {
      right = x2;
      x2 = x1;
      f2 = f1;
      x1 = right - inv_phi * (right - left);
      f1 = symmetric_chsh(x1);
    }
  }
  SymmetricOptimum out;
  out.c_star = 0.5 * (left + right);
  out.s_star = symmetric_chsh(out.c_star);
  if (out.c_star - lo < tolerance || hi - out.c_star < tolerance) {
    throw std::runtime_error("optimize_symmetric: no interior maximum in [" +
                             std::to_string(lo) + ", " + std::to_string(hi) +
                             "]");
  }
  return out;
}

GeneralOptimum optimize_general(const SettingQuad& initial,
                                double amplitude_bound, int restarts,
                                std::uint64_t seed) {
  if (!(amplitude_bound >= 1.0)) {
    throw std::invalid_argument("optimize_general: amplitude bound must be >= 1");
  }
  if (restarts < 1) {
    throw std::invalid_argument("optimize_general: restarts must be >= 1");
  }

  auto objective = [amplitude_bound](const Params& x) {
    return -chsh_ideal(quad_from_params(x, amplitude_bound)).s_value;
  };

  std::vector<Params> starts(static_cast<std::size_t>(restarts));
  starts[0] = params_from_quad(initial);
  for (int r = 1; r < restarts; ++r) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(r)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> amp(0.0, amplitude_bound);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    Params& p = starts[static_cast<std::size_t>(r)];
    for (int k = 0; k < 4; ++k) p[k] = amp(rng);
    for (int k = 4; k < 8; ++k) p[k] = phase(rng);
  }

  std::vector<Params> results(starts.size());
  std::vector<double> values(starts.size());
  detail::parallel_for(starts.size(), [&](std::size_t r) {
    results[r] = nelder_mead(objective, starts[r], 0.1, 0.3);
    values[r] = -objective(results[r]);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < values.size(); ++r) {
    if (values[r] > values[best]) {
      best = r;
    }
  }
  GeneralOptimum out;
  out.quad = quad_from_params(results[best], amplitude_bound).gauge_normalized();
  out.report = chsh_ideal(out.quad);
  return out;
}

ProbTable finite_probabilities(const ModulationSetting& a_setting,
                               const ModulationSetting& b_setting,
                               std::span<const int> bins,
                               const MeasurementModel& model,
                               const DispersionProfile& dispersion,
                               const TruncationPolicy& policy) {
  TwoPhotonState state = correlated_state(bins);
  if (!dispersion.is_zero()) {
    state = apply_dispersion(state, dispersion, Arm::A);
    state = apply_dispersion(state, dispersion.mirrored(), Arm::B);
  }
  state = apply_modulator(state, Arm::A, a_setting, policy);
  state = apply_modulator(state, Arm::B, b_setting, policy);
  return parity_probabilities(state, model);
}

ChshReport chsh_finite(const SettingQuad& quad, std::span<const int> bins,
                       const MeasurementModel& model,
                       const DispersionProfile& dispersion,
                       const TruncationPolicy& policy) {
  ChshReport report;
  detail::parallel_for(kSettingPairs.size(), [&](std::size_t k) {
    const auto [i, j] = kSettingPairs[k];
    report.drives[k] = effective_drive(quad.alice(i), quad.bob(j));
    report.correlators[k] = finite_probabilities(quad.alice(i), quad.bob(j),
                                                 bins, model, dispersion, policy)
                                .correlator();
  });
  report.s_value = chsh_combination(report.correlators);
  return report;
}

}  // namespace freqbin
