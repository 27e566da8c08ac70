#ifndef OPO_UNITS_HPP
#define OPO_UNITS_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace opo {

/// Exact SI speed of light, m/s.
template <typename Scalar = double>
inline constexpr Scalar speed_of_light = Scalar(299792458);

/// Thrown when an input violates a domain invariant. `field()` names the
/// offending parameter (a dotted path when it comes from a config file).
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Linear power ratio to decibels. Rejects non-positive input.
template <typename Scalar>
Scalar to_db(Scalar linear) {
  if (!(linear > Scalar(0))) {
    throw ValidationError("linear", "power ratio must be > 0 to express in dB");
  }
  using std::log10;
  return Scalar(10) * log10(linear);
}

template <typename Scalar>
Scalar from_db(Scalar db) {
  using std::pow;
  return pow(Scalar(10), db / Scalar(10));
}

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar rad) {
  return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

}  // namespace opo

#endif  // OPO_UNITS_HPP
