#include "asymclock/asym_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asymclock::asymmodel {

namespace {

constexpr std::size_t kMinFitSamples = 100;
constexpr std::size_t kMinTailSamples = 10;
constexpr double kGoldenTol = 1e-4;

void validate(const MixtureModel& m) {
  if (!(m.w > 0.0) || !(m.b > 0.0) || !(m.p >= 0.0 && m.p <= 1.0)) {
    throw std::invalid_argument("invalid mixture parameters");
  }
}

double laplace_cdf(double t, double b) {
  return t < 0.0 ? 0.5 * std::exp(t / b) : 1.0 - 0.5 * std::exp(-t / b);
}

// Linear-interpolation quantile of a sorted vector.
double quantile_sorted(const std::vector<double>& v, double q) {
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  double f = pos - static_cast<double>(i);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

}  // namespace

MixtureModel default_model() { return MixtureModel{}; }

double cdf(const MixtureModel& m, double t) {
  validate(m);
  if (!(t >= -1.0 && t <= 1.0)) throw std::invalid_argument("t outside [-1, 1]");
  double cu = std::clamp((t + 0.5 * m.w) / m.w, 0.0, 1.0);
  double z = laplace_cdf(1.0, m.b) - laplace_cdf(-1.0, m.b);
  double cl = (laplace_cdf(t, m.b) - laplace_cdf(-1.0, m.b)) / z;
  return m.p * cu + (1.0 - m.p) * cl;
}

double sample_t(const MixtureModel& m, Rng& rng) {
  validate(m);
  if (uniform(rng, 0.0, 1.0) < m.p) {
    return uniform(rng, -0.5 * m.w, 0.5 * m.w);
  }
  // inverse-CDF Laplace, rejection keeps it inside [-1, 1]
  for (;;) {
    double u = uniform(rng, -0.5, 0.5);
    double x = u < 0.0 ? m.b * std::log1p(2.0 * u) : -m.b * std::log1p(-2.0 * u);
    if (std::abs(x) <= 1.0) return x;
  }
}

MixtureModel fit(const std::vector<double>& t_samples, double w) {
  if (!(w > 0.0)) throw std::invalid_argument("invalid spike width");
  std::vector<double> clean;
  clean.reserve(t_samples.size());
  for (double y : t_samples) {
    if (std::abs(y) <= 1.0) clean.push_back(y);
  }
  if (clean.size() < kMinFitSamples) throw std::invalid_argument("too few samples to fit");

  // Scale: the spike never reaches past w/2, and the exponential tail is
  // memoryless, so mean(|t| - w/2 over |t| > w/2) estimates b directly.
  double tail_sum = 0.0;
  std::size_t tail_n = 0;
  for (double y : clean) {
    double a = std::abs(y);
    if (a > 0.5 * w) {
      tail_sum += a - 0.5 * w;
      ++tail_n;
    }
  }
  if (tail_n < kMinTailSamples) throw std::invalid_argument("degenerate samples: no tail mass");
  double b = tail_sum / static_cast<double>(tail_n);
  if (!(b > 0.0)) throw std::invalid_argument("degenerate samples: zero scale");

  std::vector<double> sym;
  sym.reserve(2 * clean.size());
  for (double y : clean) {
    sym.push_back(y);
    sym.push_back(-y);
  }
  std::sort(sym.begin(), sym.end());
  double q_lo = quantile_sorted(sym, 0.2);
  double q_hi = quantile_sorted(sym, 0.8);

  double n = static_cast<double>(sym.size());
  auto objective = [&](double p) {
    MixtureModel m{w, b, p};
    double l1 = 0.0;
    for (std::size_t i = 0; i < sym.size(); ++i) {
      if (sym[i] < q_lo || sym[i] > q_hi) continue;
      double ecdf = (static_cast<double>(i) + 0.5) / n;
      l1 += std::abs(cdf(m, sym[i]) - ecdf);
    }
    return l1;
  };

  // objective is convex in p, so golden section converges to the minimum
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > kGoldenTol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = objective(x2);
    }
  }
  return MixtureModel{w, b, 0.5 * (lo + hi)};
}

double sample_t_limited(const MixtureModel& m, double t_limit, Rng& rng) {
  if (!(t_limit >= 0.0 && t_limit <= 1.0)) throw std::invalid_argument("t_limit outside [0, 1]");
  if (t_limit == 0.0) return 0.0;
  for (;;) {
    double t = sample_t(m, rng);
    if (std::abs(t) <= t_limit) return t;
  }
}

double sample_asym(const MixtureModel& m, double r_min, double t_limit, Rng& rng) {
  if (!(r_min >= 0.0)) throw std::invalid_argument("negative r_min");
  return r_min * sample_t_limited(m, t_limit, rng);
}

}  // namespace asymclock::asymmodel
