#include "saferl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "saferl/errors.hpp"

namespace saferl {

double iqm(const Eigen::VectorXd& samples) {
  const Eigen::Index n = samples.size();
  if (n < 4) throw DimensionError("iqm: needs at least 4 samples");
  std::vector<Eigen::Index> order(size_t(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return samples(a) < samples(b);  // stable: ties keep input order
  });
  const Eigen::Index cut = n / 4;
  double sum = 0.0;
  for (Eigen::Index k = cut; k < n - cut; ++k) sum += samples(order[size_t(k)]);
  return sum / double(n - 2 * cut);
}

double quantile_sorted(const Eigen::VectorXd& sorted, double q) {
  const Eigen::Index n = sorted.size();
  if (n == 0) throw DimensionError("quantile: empty");
  const double h = q * double(n - 1);
  const Eigen::Index i = Eigen::Index(std::floor(h));
  if (i + 1 >= n) return sorted(n - 1);
  const double frac = h - double(i);
  return sorted(i) * (1.0 - frac) + sorted(i + 1) * frac;
}

IqmCi iqm_ci(const Eigen::VectorXd& samples, int n_boot, double level, Rng& rng) {
  IqmCi out;
  out.iqm = iqm(samples);
  const Eigen::Index n = samples.size();

  Eigen::VectorXd boot(n_boot);
  Eigen::VectorXd resample(n);
  for (int b = 0; b < n_boot; ++b) {
    for (Eigen::Index k = 0; k < n; ++k)
      resample(k) = samples(Eigen::Index(rng.below(std::uint64_t(n))));
    boot(b) = iqm(resample);
  }
  std::sort(boot.data(), boot.data() + boot.size());
  const double alpha = 1.0 - level;
  out.lo = quantile_sorted(boot, alpha / 2.0);
  out.hi = quantile_sorted(boot, 1.0 - alpha / 2.0);
  out.lo = std::min(out.lo, out.iqm);
  out.hi = std::max(out.hi, out.iqm);
  return out;
}

}  // namespace saferl
