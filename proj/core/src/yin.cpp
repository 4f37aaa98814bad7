#include <algorithm>
#include <cmath>
#include <vector>

#include "flutekit/features.hpp"

namespace flutekit {

std::optional<double> yin_f0(std::span<const double> page, double rate, const YinParams& params) {
  const std::size_t n = page.size();
  if (n < 8 || !(params.f_min > 0.0) || !(params.f_max > params.f_min)) return std::nullopt;

  const auto tau_min = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(rate / params.f_max)));
  auto tau_max = static_cast<std::size_t>(std::ceil(rate / params.f_min));
  tau_max = std::min(tau_max, n / 2);
  if (tau_min + 1 >= tau_max) return std::nullopt;

  // Difference function over a fixed integration window, one lag past
  // tau_max so the dip search can look ahead.
  const std::size_t width = n - tau_max - 1;
  std::vector<double> diff(tau_max + 2, 0.0);
  for (std::size_t tau = 1; tau <= tau_max + 1; ++tau) {
    double acc = 0.0;
    const double* a = page.data();
    const double* b = page.data() + tau;
    for (std::size_t j = 0; j < width; ++j) {
      const double d = a[j] - b[j];
      acc += d * d;
    }
    diff[tau] = acc;
  }

  // Cumulative mean normalized difference.
  std::vector<double> cmnd(tau_max + 2, 1.0);
  double running = 0.0;
  for (std::size_t tau = 1; tau <= tau_max + 1; ++tau) {
    running += diff[tau];
    cmnd[tau] = running > 0.0 ? diff[tau] * static_cast<double>(tau) / running : 1.0;
  }

  std::size_t best = 0;
  for (std::size_t tau = tau_min; tau <= tau_max; ++tau) {
    if (cmnd[tau] < params.threshold) {
      while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
      best = tau;
      break;
    }
  }
  if (best == 0) return std::nullopt;

  // Parabolic vertex through the raw difference at best-1, best, best+1.
  double lag = static_cast<double>(best);
  const double y0 = diff[best - 1], y1 = diff[best], y2 = diff[best + 1];
  const double curvature = y0 - 2.0 * y1 + y2;
  if (curvature > 0.0) {
    const double shift = 0.5 * (y0 - y2) / curvature;
    if (std::abs(shift) < 1.0) lag += shift;
  }

  const double f0 = rate / lag;
  if (!(f0 >= params.f_min && f0 <= params.f_max)) return std::nullopt;
  return f0;
}

}  // namespace flutekit
