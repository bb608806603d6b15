#pragma once

#include "error.hpp"
#include "rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace dfol {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorXd = Vector<double>;

// A point of the unit sphere S^{d-1}. Only constructible through normalization or a checked
// wrap, so every instance satisfies |u| = 1 to within 1e-12.
template <typename Scalar = double>
class Direction
{
public:
  static constexpr double kNormTolerance = 1e-12;

  static Direction normalized(Vector<Scalar> v)
  {
    Scalar const n = v.norm();
    if (!(n > Scalar(0)) || !std::isfinite(double(n))) {
      throw InvalidArgument("Direction: cannot normalize a zero or non-finite vector");
    }
    v /= n;
    return Direction(std::move(v));
  }

  static Direction from_unit(Vector<Scalar> v)
  {
    if (v.size() < 1 || std::abs(double(v.norm()) - 1.0) > kNormTolerance) {
      throw InvalidArgument("Direction: vector is not unit norm");
    }
    return Direction(std::move(v));
  }

  Vector<Scalar> const &vector() const { return v_; }
  Eigen::Index          size() const { return v_.size(); }
  Scalar                operator[](Eigen::Index i) const { return v_[i]; }

private:
  explicit Direction(Vector<Scalar> v)
    : v_(std::move(v))
  {
  }

  Vector<Scalar> v_;
};

// Uniform draw from S^{d-1} by normalizing a vector of independent standard Gaussians.
template <typename Scalar = double>
Direction<Scalar> sample_unit_sphere(Eigen::Index d, Rng &rng)
{
  if (d < 1) {
    throw InvalidArgument("sample_unit_sphere: dimension must be >= 1");
  }
  Vector<Scalar> g(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) {
      g[i] = Scalar(rng.normal());
    }
  } while (g.squaredNorm() == Scalar(0));
  return Direction<Scalar>::normalized(std::move(g));
}

// Uniform draw from the unit ball: a sphere direction scaled by U^{1/d}.
template <typename Scalar = double>
Vector<Scalar> sample_unit_ball(Eigen::Index d, Rng &rng)
{
  auto const   u = sample_unit_sphere<Scalar>(d, rng);
  Scalar const r = Scalar(std::pow(rng.uniform(), 1.0 / double(d)));
  return r * u.vector();
}

// One-point zeroth-order estimate (d / delta) * loss * u, where loss was observed at the
// perturbed point theta + delta * u.
template <typename Scalar>
auto one_point_gradient(Scalar delta, Scalar loss, Direction<Scalar> const &u)
{
  if (!(delta > Scalar(0))) {
    throw InvalidArgument("one_point_gradient: query radius must be > 0");
  }
  Scalar const scale = Scalar(u.size()) / delta * loss;
  return (scale * u.vector()).eval();
}

// lambda^(tau - m) with 0^0 = 1, so the last inner step always carries full weight.
inline double forgetting_weight(double lambda, std::int64_t tau, std::int64_t m)
{
  if (m < 1 || m > tau) {
    throw InvalidArgument("forgetting_weight: inner index m must lie in [1, tau]");
  }
  if (m == tau) {
    return 1.0;
  }
  return std::pow(lambda, double(tau - m));
}

} // namespace dfol
