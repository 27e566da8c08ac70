#ifndef OPO_PHASE_NOISE_HPP
#define OPO_PHASE_NOISE_HPP

// Degradation of measured quadrature variances by Gaussian jitter of the
// local-oscillator phase. A homodyne detector locked at phase theta sees
//   R'+ = R+ cos^2 theta + R- sin^2 theta   (and + <-> -),
// averaged over theta ~ N(0, theta_rms^2). Three routes are provided:
//
//   degrade_exact              closed form, E[cos^2] = (1 + exp(-2 s^2)) / 2
//   degrade_approx             small-angle surrogate, a fixed offset of theta_rms
//   degrade_quadrature_oracle  Gauss-Hermite quadrature of the same average
//
// Each is a 2x2 doubly-stochastic mixing of (R+, R-), so R+ + R- is conserved.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "opo/model.hpp"

namespace opo {

template <typename Scalar = double>
struct PhaseNoiseModel {
  Scalar theta_rms{};  ///< radians
};

/// Above this jitter the small-angle form stops being a useful estimate and
/// the "offset" reading of the jitter no longer applies.
template <typename Scalar = double>
inline constexpr Scalar small_angle_validity_limit = std::numbers::pi_v<Scalar> / Scalar(4);

template <typename Scalar>
void validate(const PhaseNoiseModel<Scalar>& m) {
  if (!(m.theta_rms >= 0 && std::isfinite(double(m.theta_rms)))) {
    throw ValidationError("theta_rms", "rms phase jitter must be finite and >= 0");
  }
}

template <typename Scalar>
bool beyond_small_angle(const PhaseNoiseModel<Scalar>& m) {
  return m.theta_rms > small_angle_validity_limit<Scalar>;
}

/// Doubly-stochastic mixing matrix for a given mean of sin^2 of the phase.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> mixing_matrix(Scalar mean_sin2) {
  Eigen::Matrix<Scalar, 2, 2> m;
  const Scalar mean_cos2 = Scalar(1) - mean_sin2;
  m << mean_cos2, mean_sin2, mean_sin2, mean_cos2;
  return m;
}

template <typename Scalar>
QuadratureVariances<Scalar> degrade_exact(const QuadratureVariances<Scalar>& r,
                                          const PhaseNoiseModel<Scalar>& model) {
  validate(model);
  // The sin^2 weight is formed directly so it keeps full relative precision
  // for tiny jitter; 1 - E[cos^2] would cancel.
  using std::expm1;
  const Scalar mean_sin2 = -expm1(Scalar(-2) * model.theta_rms * model.theta_rms) / Scalar(2);
  return QuadratureVariances<Scalar>(mixing_matrix(mean_sin2) * r.values);
}

template <typename Scalar>
QuadratureVariances<Scalar> degrade_approx(const QuadratureVariances<Scalar>& r,
                                           const PhaseNoiseModel<Scalar>& model) {
  validate(model);
  using std::sin;
  const Scalar s = sin(model.theta_rms);
  return QuadratureVariances<Scalar>(mixing_matrix(s * s) * r.values);
}

/// Nodes and weights of n-point Gauss-Hermite quadrature for the weight
/// exp(-t^2), by Golub-Welsch: nodes are the eigenvalues of the symmetric
/// Jacobi matrix of the Hermite recurrence, weights sqrt(pi) v_0^2.
template <typename Scalar = double>
struct GaussHermiteRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
};

template <typename Scalar>
GaussHermiteRule<Scalar> gauss_hermite(Eigen::Index n) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  Matrix jacobi = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    using std::sqrt;
    const Scalar b = sqrt(Scalar(k) / Scalar(2));
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("gauss_hermite: eigen-decomposition failed");
  }
  GaussHermiteRule<Scalar> rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = std::sqrt(std::numbers::pi_v<Scalar>) *
                 solver.eigenvectors().row(0).transpose().array().square().matrix();
  return rule;
}

/// Raised when successive quadrature refinements do not agree.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename Scalar>
QuadratureVariances<Scalar> gauss_hermite_average(const QuadratureVariances<Scalar>& r,
                                                  Scalar theta_rms, Eigen::Index nodes) {
  const auto rule = gauss_hermite<Scalar>(nodes);
  using std::cos;
  using std::sin;
  using std::sqrt;
  // theta = sqrt(2) theta_rms t maps N(0, theta_rms^2) onto the weight exp(-t^2).
  typename QuadratureVariances<Scalar>::Vector acc = QuadratureVariances<Scalar>::Vector::Zero();
  for (Eigen::Index j = 0; j < rule.nodes.size(); ++j) {
    const Scalar theta = sqrt(Scalar(2)) * theta_rms * rule.nodes(j);
    const Scalar c2 = cos(theta) * cos(theta);
    const Scalar s2 = sin(theta) * sin(theta);
    acc(0) += rule.weights(j) * (r.plus() * c2 + r.minus() * s2);
    acc(1) += rule.weights(j) * (r.minus() * c2 + r.plus() * s2);
  }
  return QuadratureVariances<Scalar>(acc / rule.weights.sum());
}

}  // namespace detail

/// Gauss-Hermite evaluation of the Gaussian phase average, used as an
/// independent check of the closed form. Starts at `nodes` points and doubles
/// until two successive rules agree to 1e-9 relative; throws QuadratureError
/// if that does not happen by `max_nodes`.
template <typename Scalar>
QuadratureVariances<Scalar> degrade_quadrature_oracle(const QuadratureVariances<Scalar>& r,
                                                      const PhaseNoiseModel<Scalar>& model,
                                                      Eigen::Index nodes = 32,
                                                      Eigen::Index max_nodes = 256) {
  validate(model);
  if (nodes < 16) throw ValidationError("nodes", "quadrature needs at least 16 nodes");
  if (model.theta_rms == Scalar(0)) return r;

  constexpr Scalar tolerance = Scalar(1e-9);
  auto previous = detail::gauss_hermite_average(r, model.theta_rms, nodes);
  for (Eigen::Index n = 2 * nodes; n <= max_nodes; n *= 2) {
    auto current = detail::gauss_hermite_average(r, model.theta_rms, n);
    const Scalar change = ((current.values - previous.values).array().abs() /
                           current.values.array().abs())
                              .maxCoeff();
    if (change <= tolerance) return current;
    previous = current;
  }
  throw QuadratureError("phase-noise quadrature did not converge to 1e-9 within " +
                        std::to_string(max_nodes) + " nodes");
}

enum class Degradation { exact, approx };

template <typename Scalar>
QuadratureVariances<Scalar> degrade(const QuadratureVariances<Scalar>& r,
                                    const PhaseNoiseModel<Scalar>& model, Degradation form) {
  return form == Degradation::exact ? degrade_exact(r, model) : degrade_approx(r, model);
}

}  // namespace opo

#endif  // OPO_PHASE_NOISE_HPP
