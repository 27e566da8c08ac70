#ifndef OPO_MODEL_HPP
#define OPO_MODEL_HPP

// Forward model of a sub-threshold degenerate OPO seen through a homodyne
// detector: cavity escape efficiency, detection efficiency, decay rate,
// sideband detuning, pump parameter and the output quadrature variances.
//
// Everything is templated on the scalar type; `double` is the default and the
// only instantiation the tools use.

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <variant>

#include "opo/units.hpp"

namespace opo {

/// Largest admissible pump parameter. At x = 1 the anti-squeezed variance is
/// singular on resonance, so the threshold itself is excluded.
template <typename Scalar = double>
inline constexpr Scalar max_pump_parameter = Scalar(1) - Scalar(1e-9);

template <typename Scalar = double>
struct OpoCavity {
  Scalar transmission{};       ///< output-coupler transmission T
  Scalar loss{};               ///< intracavity round-trip loss L
  Scalar round_trip_length{};  ///< optical round-trip length l, metres
};

template <typename Scalar = double>
struct DetectionChain {
  Scalar propagation{1};  ///< zeta
  Scalar quantum{1};      ///< photodiode quantum efficiency eta
  Scalar visibility{1};   ///< homodyne visibility xi (enters squared)
  /// Detector circuit noise relative to shot noise, linear. Zero means an
  /// ideal detector.
  Scalar dark_clearance{0};
};

template <typename Scalar = double>
struct SidebandPoint {
  Scalar omega{};  ///< angular sideband frequency, rad/s
};

// Pump operating point, in any one of the three ways it is usually quoted.
template <typename Scalar = double>
struct PumpParameter {
  Scalar x{};
};
template <typename Scalar = double>
struct ClassicalGain {
  Scalar gain{1};
};
/// Pump power against oscillation threshold, both in watts.
template <typename Scalar = double>
struct PumpPower {
  Scalar power{};
  Scalar threshold{};
};

template <typename Scalar = double>
using PumpOperatingPoint =
    std::variant<PumpParameter<Scalar>, ClassicalGain<Scalar>, PumpPower<Scalar>>;

/// Shot-noise-normalized linear variances. Component 0 is the anti-squeezed
/// quadrature R+, component 1 the squeezed quadrature R-.
template <typename Scalar = double>
struct QuadratureVariances {
  using Vector = Eigen::Matrix<Scalar, 2, 1>;

  Vector values{Vector::Ones()};

  QuadratureVariances() = default;
  QuadratureVariances(Scalar r_plus, Scalar r_minus) : values(r_plus, r_minus) {}
  explicit QuadratureVariances(const Vector& v) : values(v) {}

  Scalar plus() const { return values(0); }
  Scalar minus() const { return values(1); }
  Scalar plus_db() const { return to_db(plus()); }
  Scalar minus_db() const { return to_db(minus()); }
};

// ---------------------------------------------------------------------------
// Validation

template <typename Scalar>
void validate(const OpoCavity<Scalar>& c) {
  if (!(c.transmission > 0 && c.transmission < 1)) {
    throw ValidationError("T", "output-coupler transmission must lie in (0,1)");
  }
  if (!(c.loss >= 0 && c.loss < 1)) {
    throw ValidationError("L", "intracavity loss must lie in [0,1)");
  }
  if (!(c.transmission + c.loss < 1)) {
    throw ValidationError("L", "T + L must be < 1");
  }
  if (!(c.round_trip_length > 0 && std::isfinite(double(c.round_trip_length)))) {
    throw ValidationError("round_trip_m", "round-trip length must be > 0");
  }
}

template <typename Scalar>
void validate(const DetectionChain<Scalar>& d) {
  auto unit_interval = [](Scalar v, const char* name) {
    if (!(v > 0 && v <= 1)) throw ValidationError(name, "must lie in (0,1]");
  };
  unit_interval(d.propagation, "zeta");
  unit_interval(d.quantum, "eta");
  unit_interval(d.visibility, "xi");
  if (!(d.dark_clearance >= 0 && d.dark_clearance < 1)) {
    throw ValidationError("dark_clearance", "dark-noise clearance must lie in [0,1)");
  }
}

// ---------------------------------------------------------------------------
// Efficiencies and rates

/// rho = T / (T + L)
template <typename Scalar>
Scalar escape_efficiency(const OpoCavity<Scalar>& cavity) {
  validate(cavity);
  return cavity.transmission / (cavity.transmission + cavity.loss);
}

/// alpha = zeta * eta * xi^2
template <typename Scalar>
Scalar detection_efficiency(const DetectionChain<Scalar>& chain) {
  validate(chain);
  return chain.propagation * chain.quantum * chain.visibility * chain.visibility;
}

/// Cavity decay rate gamma = c (T + L) / l in rad/s. No refractive-index
/// correction: l is already the optical round-trip length.
template <typename Scalar>
Scalar cavity_decay_rate(const OpoCavity<Scalar>& cavity) {
  validate(cavity);
  return speed_of_light<Scalar> * (cavity.transmission + cavity.loss) / cavity.round_trip_length;
}

/// Omega = omega / gamma
template <typename Scalar>
Scalar detuning(const SidebandPoint<Scalar>& point, const OpoCavity<Scalar>& cavity) {
  if (!(point.omega >= 0)) throw ValidationError("omega", "sideband frequency must be >= 0");
  return point.omega / cavity_decay_rate(cavity);
}

template <typename Scalar>
void validate_pump_parameter(Scalar x) {
  if (!(x >= 0)) throw ValidationError("x", "pump parameter must be >= 0");
  if (!(x <= max_pump_parameter<Scalar>)) {
    throw ValidationError("x", "pump parameter must be below oscillation threshold (x < 1)");
  }
}

/// Normalizes any pump representation to the pump parameter x in [0,1).
///
/// Gain inverts G = 1/(1-x)^2 on the amplification branch x = 1 - 1/sqrt(G);
/// G < 1 (a de-amplification reading) is rejected. Power uses
/// x = sqrt(P/P_th), the standard sub-threshold OPO relation, which is a
/// modelling assumption rather than something measured here.
template <typename Scalar>
Scalar pump_parameter(const PumpOperatingPoint<Scalar>& op) {
  using std::sqrt;
  Scalar x{};
  if (const auto* p = std::get_if<PumpParameter<Scalar>>(&op)) {
    x = p->x;
  } else if (const auto* g = std::get_if<ClassicalGain<Scalar>>(&op)) {
    if (!(g->gain >= 1)) {
      throw ValidationError("gain",
                            "classical gain must be >= 1; supply the amplification gain "
                            "measured at the amplified phase, not a de-amplification reading");
    }
    x = Scalar(1) - Scalar(1) / sqrt(g->gain);
  } else {
    const auto& pw = std::get<PumpPower<Scalar>>(op);
    if (!(pw.threshold > 0)) throw ValidationError("threshold", "threshold power must be > 0");
    if (!(pw.power >= 0)) throw ValidationError("power", "pump power must be >= 0");
    if (!(pw.power < pw.threshold)) {
      throw ValidationError("power", "pump power at or above oscillation threshold");
    }
    x = sqrt(pw.power / pw.threshold);
  }
  validate_pump_parameter(x);
  return x;
}

/// G = 1 / (1 - x)^2
template <typename Scalar>
Scalar classical_gain(Scalar x) {
  validate_pump_parameter(x);
  return Scalar(1) / ((Scalar(1) - x) * (Scalar(1) - x));
}

/// Output-mode variances of the below-threshold OPO:
///   R+ = 1 + alpha rho 4x / ((1 - x)^2 + 4 Omega^2)
///   R- = 1 - alpha rho 4x / ((1 + x)^2 + 4 Omega^2)
/// The anti-squeezed (+) quadrature carries (1 - x)^2.
template <typename Scalar>
QuadratureVariances<Scalar> forward_variances(Scalar alpha, Scalar rho, Scalar x, Scalar Omega) {
  if (!(alpha >= 0 && alpha <= 1)) throw ValidationError("alpha", "must lie in [0,1]");
  if (!(rho >= 0 && rho <= 1)) throw ValidationError("rho", "must lie in [0,1]");
  validate_pump_parameter(x);
  if (!(Omega >= 0)) throw ValidationError("Omega", "detuning must be >= 0");

  const Scalar efficiency = alpha * rho;
  const Scalar four_omega_sq = Scalar(4) * Omega * Omega;
  const Scalar gain_term = Scalar(4) * x;
  const Scalar below = (Scalar(1) - x) * (Scalar(1) - x) + four_omega_sq;
  const Scalar above = (Scalar(1) + x) * (Scalar(1) + x) + four_omega_sq;
  const Scalar r_plus = Scalar(1) + efficiency * gain_term / below;
  // 1 - e 4x / above, rewritten as a sum of non-negative terms over `above`
  // using (1+x)^2 - 4x = (1-x)^2; the literal form cancels near threshold.
  const Scalar r_minus = (below + (Scalar(1) - efficiency) * gain_term) / above;
  return {r_plus, r_minus};
}

/// All intermediate quantities of one forward evaluation, for reporting.
template <typename Scalar = double>
struct ForwardPrediction {
  Scalar alpha{};
  Scalar rho{};
  Scalar x{};
  Scalar gain{};
  Scalar gamma{};  ///< rad/s
  Scalar Omega{};
  QuadratureVariances<Scalar> variances;
};

template <typename Scalar>
ForwardPrediction<Scalar> predict(const OpoCavity<Scalar>& cavity, const DetectionChain<Scalar>& chain,
                                  const PumpOperatingPoint<Scalar>& pump,
                                  const SidebandPoint<Scalar>& sideband) {
  ForwardPrediction<Scalar> p;
  p.alpha = detection_efficiency(chain);
  p.rho = escape_efficiency(cavity);
  p.x = pump_parameter(pump);
  p.gain = classical_gain(p.x);
  p.gamma = cavity_decay_rate(cavity);
  p.Omega = detuning(sideband, cavity);
  p.variances = forward_variances(p.alpha, p.rho, p.x, p.Omega);
  return p;
}

}  // namespace opo

#endif  // OPO_MODEL_HPP
