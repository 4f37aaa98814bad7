#include <fftw3.h>

#include <algorithm>

#include <mutex>

#include "flutekit/error.hpp"
#include "flutekit/features.hpp"

namespace flutekit {

namespace {
// The FFTW planner is not re-entrant; executing a finished plan is.
std::mutex g_planner_mutex;
}  // namespace

struct Periodogram::Plan {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit Plan(std::size_t n) {
    std::lock_guard lock(g_planner_mutex);
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~Plan() {
    std::lock_guard lock(g_planner_mutex);
    fftw_destroy_plan(plan);
    fftw_free(out);
    fftw_free(in);
  }
};

Periodogram::Periodogram(std::size_t size) : size_(size) {
  if (size == 0) throw_input("periodogram: size must be positive");
  plan_ = std::make_unique<Plan>(size);
}

Periodogram::~Periodogram() = default;
Periodogram::Periodogram(Periodogram&&) noexcept = default;
Periodogram& Periodogram::operator=(Periodogram&&) noexcept = default;

std::vector<double> Periodogram::compute(std::span<const double> page) {
  if (page.size() != size_) throw_input("periodogram: page size mismatch");
  std::copy(page.begin(), page.end(), plan_->in);
  fftw_execute(plan_->plan);

  // |X_k|^2 / N on the one-sided spectrum; interior bins stand for their
  // mirrored partner so the sum matches sum(x^2).
  const std::size_t bins = size_ / 2 + 1;
  const double n = static_cast<double>(size_);
  std::vector<double> p(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = plan_->out[k][0];
    const double im = plan_->out[k][1];
    const bool unpaired = k == 0 || (size_ % 2 == 0 && k == size_ / 2);
    p[k] = (re * re + im * im) / n * (unpaired ? 1.0 : 2.0);
  }
  return p;
}

double Periodogram::amplitude(std::span<const double> page) {
  double sum = 0.0;
  for (double v : compute(page)) sum += v;
  return sum / static_cast<double>(size_);
}

double page_amplitude(std::span<const double> page) {
  Periodogram p(page.size());
  return p.amplitude(page);
}

}  // namespace flutekit
