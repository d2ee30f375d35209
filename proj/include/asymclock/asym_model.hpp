#pragma once

#include <vector>

#include "asymclock/rng.hpp"

namespace asymclock::asymmodel {

// Symmetric two-part distribution for the relative asymmetry T = asym/r_min
// on [-1, 1]: with probability p a centered uniform spike of width w, else a
// Laplace body of scale b truncated to [-1, 1] and renormalized.
struct MixtureModel {
  double w = 0.00136;
  double b = 0.0450;
  double p = 0.274;
};

MixtureModel default_model();

double sample_t(const MixtureModel& m, Rng& rng);  // in [-1, 1]
double cdf(const MixtureModel& m, double t);       // throws outside [-1, 1]

// sample_t restricted to [-t_limit, t_limit] by rejection (the model
// renormalized onto the narrower support). t_limit = 0 returns 0.
double sample_t_limited(const MixtureModel& m, double t_limit, Rng& rng);

// Fits (b, p) to observed T samples with w given. Samples are symmetrized;
// b comes from the spike-free tail (|t| > w/2, shifted by w/2 so the
// exponential tail mean is b itself); p minimizes the L1 distance between
// model and empirical CDF over the central quantile range [q20, q80],
// searched by golden section to 1e-4.
MixtureModel fit(const std::vector<double>& t_samples, double w = 0.00136);

// asym = r_min * T with T drawn from the model restricted to
// [-t_limit, t_limit], so |asym| <= t_limit * r_min.
double sample_asym(const MixtureModel& m, double r_min, double t_limit, Rng& rng);

}  // namespace asymclock::asymmodel
