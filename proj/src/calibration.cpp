#include "opo/calibration.hpp"

#include <cmath>
#include <limits>

#include "opo/minimize.hpp"

namespace opo {

void validate(const MeasuredLevels& m) {
  if (!std::isfinite(m.squeezing_db) || !(m.squeezing_db < 0)) {
    throw ValidationError("squeezing_db", "squeezed level must be finite and below shot noise (< 0 dB)");
  }
  if (m.anti_squeezing_db && (!std::isfinite(*m.anti_squeezing_db) || !(*m.anti_squeezing_db > 0))) {
    throw ValidationError("anti_squeezing_db",
                          "anti-squeezed level must be finite and above shot noise (> 0 dB)");
  }
  if (m.pump_power && !(*m.pump_power >= 0)) {
    throw ValidationError("pump_power", "must be >= 0");
  }
  if (m.uncertainty_db && !(*m.uncertainty_db >= 0)) {
    throw ValidationError("uncertainty_db", "must be >= 0");
  }
}

std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::ok:
      return "ok";
    case FitStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

void check_clearance(double clearance) {
  if (!(clearance >= 0 && clearance < 1)) {
    throw ValidationError("clearance", "dark-noise clearance must lie in [0,1)");
  }
}

}  // namespace

double dark_noise_correct(double level_db, double clearance) {
  check_clearance(clearance);
  if (std::isnan(level_db)) throw ValidationError("level_db", "not a number");
  const double measured = from_db(level_db);
  if (!(measured > clearance)) {
    throw InfeasibleReading("measured noise power does not exceed the detector dark noise");
  }
  return to_db((measured - clearance) / (1.0 - clearance));
}

double dark_noise_uncorrect(double level_db, double clearance) {
  check_clearance(clearance);
  if (std::isnan(level_db)) throw ValidationError("level_db", "not a number");
  return to_db(from_db(level_db) * (1.0 - clearance) + clearance);
}

FitResult fit_theta(const MeasuredLevels& measured, const QuadratureVariances<double>& predicted,
                    const FitOptions& options) {
  validate(measured);
  const double target = measured.squeezing_db;
  auto squeezed_db = [&](double theta) {
    return degrade(predicted, PhaseNoiseModel<double>{theta}, options.model).minus_db();
  };
  auto residual = [&](double theta) {
    const double d = squeezed_db(theta) - target;
    return d * d;
  };

  FitResult result;
  const double floor_db = predicted.minus_db();
  const double ceiling_db = squeezed_db(max_fit_theta);
  if (target < floor_db || target > ceiling_db) {
    result.status = FitStatus::infeasible;
    result.theta_rms = target < floor_db ? 0.0 : max_fit_theta;
    result.residual = residual(result.theta_rms);
    return result;
  }

  const auto best = brent_minimize<double>(residual, 0.0, max_fit_theta);
  result.theta_rms = best.argmin;
  result.residual = best.value;
  result.iterations = best.iterations;
  // Brent never evaluates the interval ends; an exact boundary solution
  // (e.g. a reading equal to the jitter-free floor) must still win.
  for (double edge : {0.0, max_fit_theta}) {
    const double r = residual(edge);
    if (r < result.residual || (r == result.residual && edge < result.theta_rms)) {
      result.theta_rms = edge;
      result.residual = r;
    }
  }
  return result;
}

double joint_residual(const MeasuredLevels& measured, double alpha, double rho, double Omega,
                      double x, double theta_rms, Degradation model) {
  const auto r = degrade(forward_variances(alpha, rho, x, Omega), PhaseNoiseModel<double>{theta_rms}, model);
  const double ds = r.minus_db() - measured.squeezing_db;
  const double da = r.plus_db() - *measured.anti_squeezing_db;
  return ds * ds + da * da;
}

FitResult fit_joint(const MeasuredLevels& measured, double alpha, double rho, double Omega,
                    const FitOptions& options) {
  validate(measured);
  if (!measured.anti_squeezing_db) {
    throw ValidationError("anti_squeezing_db", "joint fit needs both squeezed and anti-squeezed levels");
  }
  if (!(options.seed_grid_x_step > 0 && options.seed_grid_theta_step > 0)) {
    throw ValidationError("seed_grid", "grid steps must be > 0");
  }
  const double x_max = max_pump_parameter<double>;
  auto residual = [&](double x, double theta) {
    return joint_residual(measured, alpha, rho, Omega, x, theta, options.model);
  };

  // Coarse seeding grid, x outer / theta inner, strict improvement only, so
  // ties resolve to the lowest x and then the lowest theta.
  double best_x = 0, best_theta = 0;
  double best = std::numeric_limits<double>::infinity();
  const auto nx = static_cast<int>(std::floor(x_max / options.seed_grid_x_step));
  const auto nt = static_cast<int>(std::floor(max_fit_theta / options.seed_grid_theta_step + 1e-9));
  for (int i = 0; i <= nx; ++i) {
    const double x = i * options.seed_grid_x_step;
    for (int j = 0; j <= nt; ++j) {
      const double theta = j * options.seed_grid_theta_step;
      const double r = residual(x, theta);
      if (r < best) {
        best = r;
        best_x = x;
        best_theta = theta;
      }
    }
  }

  using Point = Eigen::Vector2d;
  const Point lower(0.0, 0.0);
  const Point upper(x_max, max_fit_theta);
  const Point step(options.seed_grid_x_step, options.seed_grid_theta_step);
  auto objective = [&](const Point& p) { return residual(p(0), p(1)); };

  FitResult result;
  result.x = best_x;
  result.theta_rms = best_theta;
  result.residual = best;

  // Restart from the incumbent until a descent stops improving it; a single
  // Nelder-Mead run can stall on a collapsed simplex.
  Point start(best_x, best_theta);
  constexpr int max_restarts = 5;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    const auto run = nelder_mead_box<double, 2>(objective, start, step, lower, upper, options.max_iterations);
    result.iterations += run.iterations;
    const bool improved = run.value < result.residual;
    if (improved) {
      result.x = run.argmin(0);
      result.theta_rms = run.argmin(1);
      result.residual = run.value;
    }
    if (!run.converged) {
      throw FitNotConverged("joint fit did not converge within " + std::to_string(options.max_iterations) +
                                " simplex iterations",
                            result);
    }
    if (!improved || (start - run.argmin).cwiseAbs().cwiseQuotient(step).maxCoeff() < 1e-9) break;
    start = run.argmin;
  }
  return result;
}

}  // namespace opo
