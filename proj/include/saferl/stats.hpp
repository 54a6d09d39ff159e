#pragma once

#include <Eigen/Dense>

#include "saferl/rng.hpp"

namespace saferl {

// Interquartile mean: mean of the middle 50% after dropping floor(n/4)
// samples from each end of the sorted order (ties keep input order).
// Requires at least 4 samples.
double iqm(const Eigen::VectorXd& samples);

struct IqmCi {
  double iqm = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap over IQMs of resamples-with-replacement. The CI is
// widened to bracket the point estimate when the percentile interval just
// misses it.
IqmCi iqm_ci(const Eigen::VectorXd& samples, int n_boot, double level, Rng& rng);

// Linear-interpolation quantile of a sorted vector, q in [0, 1].
double quantile_sorted(const Eigen::VectorXd& sorted, double q);

}  // namespace saferl
