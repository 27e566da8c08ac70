#ifndef OPO_LANGEVIN_HPP
#define OPO_LANGEVIN_HPP

// Stochastic check of the output-spectrum law. The two intracavity
// quadratures of a sub-threshold degenerate OPO obey linear Langevin
// equations
//
//   dX+- = -(gamma/2)(1 -+ x) X+- dt + sqrt(gamma_out) dW_out + sqrt(gamma_loss) dW_loss
//
// driven by vacuum at the output coupler and at the loss port. They are
// integrated with Euler-Maruyama, the output field sqrt(gamma_out) X - X_in
// is formed, and its spectrum is estimated with segment-averaged Hann
// periodograms. Nothing here uses the closed-form variances.
//
// Normalization: with dW ~ N(0, dt) the reflected vacuum dW/dt has two-sided
// density 1, so the periodogram is directly in shot-noise units. The output
// pairs each increment dW_k with the step average (X_k + X_{k+1}) / 2, which
// makes the discrete x = 0 response exactly all-pass (spectrum 1 at every
// frequency) and reproduces the continuous zero-frequency value exactly.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace opo {

struct LangevinConfig {
  double gamma_out{};   ///< output-coupler decay rate c T / l, rad/s
  double gamma_loss{};  ///< intracavity loss rate c L / l, rad/s
  double x{};           ///< pump parameter
  double dt{};          ///< integration step, s
  double duration{};    ///< total simulated time over all segments, s
  std::uint64_t seed{};
  int segments{};

  double gamma_total() const { return gamma_out + gamma_loss; }
  /// Samples per periodogram segment.
  long samples_per_segment() const;
};

/// Smallest admissible number of segments.
inline constexpr int min_segments = 8;

/// Upper bound on dt * gamma_total * (1 + x) / 2.
inline constexpr double max_step_decay = 0.1;

/// Throws ValidationError when the explicit scheme would be unstable or the
/// run too short to estimate a standard error.
void validate(const LangevinConfig& cfg);

struct SpectrumPoint {
  double omega{};  ///< rad/s
  double r_plus{};
  double r_minus{};
  double stderr_plus{};
  double stderr_minus{};
};

struct SpectrumEstimate {
  std::vector<SpectrumPoint> points;
  double bin_spacing{};  ///< periodogram bin spacing, rad/s
  long samples_per_segment{};
  int segments{};
  std::uint64_t seed{};
};

/// Estimates the normalized output spectrum of both quadratures at each
/// requested angular frequency (rad/s), interpolating linearly between the
/// two nearest periodogram bins. Segments are independent noise streams keyed
/// by (seed, segment, port) and may run on `threads` workers (0 = hardware
/// concurrency); results do not depend on the thread count.
SpectrumEstimate simulate_output_spectrum(const LangevinConfig& cfg, std::span<const double> omegas,
                                          unsigned threads = 0);

}  // namespace opo

#endif  // OPO_LANGEVIN_HPP
