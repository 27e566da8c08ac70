#ifndef OPO_CALIBRATION_HPP
#define OPO_CALIBRATION_HPP

// Inverse problems on measured noise levels: removing detector circuit noise
// from spectrum-analyzer readings, and inferring the rms phase jitter (and
// optionally the pump parameter) from squeezing / anti-squeezing levels.
//
// Residuals are squared differences in dB, which keeps a ~0.15 linear
// squeezed reading and a ~20 linear anti-squeezed reading on equal footing.

#include <optional>
#include <stdexcept>
#include <string>

#include "opo/model.hpp"
#include "opo/phase_noise.hpp"

namespace opo {

/// A measured reading at one pump setting, dB relative to shot noise.
struct MeasuredLevels {
  double squeezing_db{};
  std::optional<double> anti_squeezing_db;
  std::optional<double> pump_power;  ///< watts
  std::optional<double> uncertainty_db;
};

void validate(const MeasuredLevels& m);

enum class FitStatus { ok, infeasible };

std::string to_string(FitStatus s);

struct FitResult {
  double theta_rms{};       ///< radians
  std::optional<double> x;  ///< set by the joint fit only
  double residual{};        ///< sum of squared dB residuals
  int iterations{};
  FitStatus status{FitStatus::ok};
};

struct FitOptions {
  Degradation model{Degradation::exact};
  /// Cap on simplex iterations per descent in the joint fit.
  int max_iterations{4000};
  /// Coarse seeding grid of the joint fit.
  double seed_grid_x_step{0.01};
  double seed_grid_theta_step{deg_to_rad(0.25)};
};

/// Upper end of the jitter search interval, radians.
inline constexpr double max_fit_theta = std::numbers::pi / 4;

/// Raised by a reading that lies at or below the detector dark noise.
class InfeasibleReading : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when the simplex descent exhausts its iteration cap. Carries the
/// best point found so far.
class FitNotConverged : public std::runtime_error {
 public:
  FitNotConverged(const std::string& what, FitResult best)
      : std::runtime_error(what), best_(best) {}
  const FitResult& best() const noexcept { return best_; }

 private:
  FitResult best_;
};

/// Removes detector circuit noise of linear power `clearance` (relative to
/// shot noise) from a reading. Signal and shot-noise reference both carry the
/// dark noise, so the corrected ratio is (P - d) / (1 - d).
double dark_noise_correct(double level_db, double clearance);

/// Inverse of dark_noise_correct: what the analyzer would read for a true
/// level. Accepts -infinity (no optical noise), which yields to_db(clearance).
double dark_noise_uncorrect(double level_db, double clearance);

/// Fits the rms phase jitter to the squeezed reading alone by bounded Brent
/// minimization over [0, pi/4]. Readings below the jitter-free floor R-, or
/// above what pi/4 of jitter can produce, come back as FitStatus::infeasible
/// with the boundary value.
FitResult fit_theta(const MeasuredLevels& measured, const QuadratureVariances<double>& predicted,
                    const FitOptions& options = {});

/// Jointly fits (x, theta_rms) to both readings: a coarse grid seeds a
/// box-constrained Nelder-Mead descent. Throws FitNotConverged when the
/// iteration cap is hit.
FitResult fit_joint(const MeasuredLevels& measured, double alpha, double rho, double Omega,
                    const FitOptions& options = {});

/// Squared-dB residual of the joint model at (x, theta_rms). Exposed for
/// grid oracles and diagnostics.
double joint_residual(const MeasuredLevels& measured, double alpha, double rho, double Omega,
                      double x, double theta_rms, Degradation model = Degradation::exact);

}  // namespace opo

#endif  // OPO_CALIBRATION_HPP
