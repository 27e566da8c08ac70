#ifndef OPO_CONFIG_HPP
#define OPO_CONFIG_HPP

// JSON experiment description. Angles are in degrees, powers in mW and the
// sideband frequency in Hz at this boundary; everything handed to the model
// is in radians, watts and rad/s.
//
//   {
//     "cavity":      {"T": 0.15, "L": 0.011, "round_trip_m": 0.214},
//     "detection":   {"zeta": 1.0, "eta": 0.994, "xi": 0.979, "dark_clearance_db": -17.7},
//     "pump":        {"mode": "gain", "value": 8.83, "threshold_mW": 567.9},
//     "noise":       {"theta_rms_deg": 4.3},
//     "measurement": {"frequency_hz": 1e6}
//   }
//
// `dark_clearance_db` and `threshold_mW` are optional; power mode requires
// `threshold_mW`.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "opo/model.hpp"
#include "opo/phase_noise.hpp"

namespace opo {

enum class PumpMode { gain, x, power };

std::string to_string(PumpMode mode);

struct ExperimentConfig {
  struct Cavity {
    double T{};
    double L{};
    double round_trip_m{};
    bool operator==(const Cavity&) const = default;
  } cavity;
  struct Detection {
    double zeta{1};
    double eta{1};
    double xi{1};
    std::optional<double> dark_clearance_db;
    bool operator==(const Detection&) const = default;
  } detection;
  struct Pump {
    PumpMode mode{PumpMode::x};
    double value{};
    std::optional<double> threshold_mW;
    bool operator==(const Pump&) const = default;
  } pump;
  struct Noise {
    double theta_rms_deg{};
    bool operator==(const Noise&) const = default;
  } noise;
  struct Measurement {
    double frequency_hz{};
    bool operator==(const Measurement&) const = default;
  } measurement;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates. Errors are ValidationError whose field() is the
/// dotted path of the offending entry, e.g. "cavity.T".
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Runs every component invariant, reporting config field paths.
void validate(const ExperimentConfig& cfg);

// Conversions into model types (SI units).
OpoCavity<double> cavity_of(const ExperimentConfig& cfg);
DetectionChain<double> detection_of(const ExperimentConfig& cfg);
PumpOperatingPoint<double> pump_of(const ExperimentConfig& cfg);
SidebandPoint<double> sideband_of(const ExperimentConfig& cfg);
PhaseNoiseModel<double> phase_noise_of(const ExperimentConfig& cfg);

/// Forward prediction at the configured operating point.
ForwardPrediction<double> predict(const ExperimentConfig& cfg);

}  // namespace opo

#endif  // OPO_CONFIG_HPP
