#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace saferl {

// Zonotope in generator representation: {c + G b : ||b||_inf <= 1}.
// Zero generators encode a point. All entries must be finite.
struct Zonotope {
  Eigen::VectorXd center;
  Eigen::MatrixXd generators;  // dim x num_generators

  Zonotope() = default;
  Zonotope(Eigen::VectorXd c, Eigen::MatrixXd g);

  static Zonotope point(Eigen::VectorXd c);
  // Axis-aligned box [lo, hi] as a zonotope with diagonal generators.
  static Zonotope box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

  Eigen::Index dim() const { return center.size(); }
  Eigen::Index num_generators() const { return generators.cols(); }

  // Support value max_{z in Z} d.z = d.c + sum_j |d.g_j|.
  double support(const Eigen::VectorXd& dir) const;

  // Componentwise interval hull.
  void bounding_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const;

  // Image under z -> M z (+ shift).
  Zonotope linear_map(const Eigen::MatrixXd& m) const;
  Zonotope translate(const Eigen::VectorXd& v) const;

  // Throws DimensionError / NumericalError on inconsistent or non-finite data.
  void validate() const;
};

// Plain-text zonotope file:
//   # comment lines start with '#'
//   dim <n>
//   center <n decimal numbers>
//   generators <eta>
//   <eta rows of n decimal numbers, one generator per row>
// Parsing uses std::from_chars; no locale dependence.
Zonotope read_zonotope(std::istream& in);
Zonotope load_zonotope(const std::string& path);
void write_zonotope(std::ostream& out, const Zonotope& z);
void save_zonotope(const std::string& path, const Zonotope& z);

}  // namespace saferl
