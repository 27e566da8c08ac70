#include "opo/config.hpp"

#include <fstream>
#include <map>
#include <numbers>

namespace opo {

using nlohmann::json;

std::string to_string(PumpMode mode) {
  switch (mode) {
    case PumpMode::gain:
      return "gain";
    case PumpMode::x:
      return "x";
    case PumpMode::power:
      return "power";
  }
  return "unknown";
}

namespace {

const json& section(const json& j, const std::string& name) {
  if (!j.contains(name)) throw ValidationError(name, "missing section");
  const json& s = j.at(name);
  if (!s.is_object()) throw ValidationError(name, "must be an object");
  return s;
}

double number(const json& s, const std::string& sec, const std::string& key) {
  const std::string path = sec + "." + key;
  if (!s.contains(key)) throw ValidationError(path, "missing");
  const json& v = s.at(key);
  if (!v.is_number()) throw ValidationError(path, "must be a number");
  return v.get<double>();
}

std::optional<double> optional_number(const json& s, const std::string& sec, const std::string& key) {
  if (!s.contains(key) || s.at(key).is_null()) return std::nullopt;
  return number(s, sec, key);
}

// Re-raises a model-level ValidationError under its config path.
template <typename F>
void with_path(const std::string& sec, const std::map<std::string, std::string>& rename, F&& check) {
  try {
    check();
  } catch (const ValidationError& e) {
    auto it = rename.find(e.field());
    const std::string key = it == rename.end() ? e.field() : it->second;
    const std::string what = e.what();
    throw ValidationError(sec + "." + key, what.substr(e.field().size() + 2));
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("$", "config must be a JSON object");
  ExperimentConfig cfg;

  const json& cav = section(j, "cavity");
  cfg.cavity.T = number(cav, "cavity", "T");
  cfg.cavity.L = number(cav, "cavity", "L");
  cfg.cavity.round_trip_m = number(cav, "cavity", "round_trip_m");

  const json& det = section(j, "detection");
  cfg.detection.zeta = number(det, "detection", "zeta");
  cfg.detection.eta = number(det, "detection", "eta");
  cfg.detection.xi = number(det, "detection", "xi");
  cfg.detection.dark_clearance_db = optional_number(det, "detection", "dark_clearance_db");

  const json& pump = section(j, "pump");
  if (!pump.contains("mode") || !pump.at("mode").is_string()) {
    throw ValidationError("pump.mode", "must be one of \"gain\", \"x\", \"power\"");
  }
  const auto mode = pump.at("mode").get<std::string>();
  if (mode == "gain") {
    cfg.pump.mode = PumpMode::gain;
  } else if (mode == "x") {
    cfg.pump.mode = PumpMode::x;
  } else if (mode == "power") {
    cfg.pump.mode = PumpMode::power;
  } else {
    throw ValidationError("pump.mode", "must be one of \"gain\", \"x\", \"power\"");
  }
  cfg.pump.value = number(pump, "pump", "value");
  cfg.pump.threshold_mW = optional_number(pump, "pump", "threshold_mW");

  cfg.noise.theta_rms_deg = number(section(j, "noise"), "noise", "theta_rms_deg");
  cfg.measurement.frequency_hz = number(section(j, "measurement"), "measurement", "frequency_hz");

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["cavity"] = {{"T", cfg.cavity.T}, {"L", cfg.cavity.L}, {"round_trip_m", cfg.cavity.round_trip_m}};
  j["detection"] = {{"zeta", cfg.detection.zeta}, {"eta", cfg.detection.eta}, {"xi", cfg.detection.xi}};
  if (cfg.detection.dark_clearance_db) j["detection"]["dark_clearance_db"] = *cfg.detection.dark_clearance_db;
  j["pump"] = {{"mode", to_string(cfg.pump.mode)}, {"value", cfg.pump.value}};
  if (cfg.pump.threshold_mW) j["pump"]["threshold_mW"] = *cfg.pump.threshold_mW;
  j["noise"] = {{"theta_rms_deg", cfg.noise.theta_rms_deg}};
  j["measurement"] = {{"frequency_hz", cfg.measurement.frequency_hz}};
  return j;
}

void validate(const ExperimentConfig& cfg) {
  with_path("cavity", {}, [&] { validate(cavity_of(cfg)); });
  with_path("detection", {{"dark_clearance", "dark_clearance_db"}}, [&] { validate(detection_of(cfg)); });
  with_path("pump", {{"x", "value"}, {"gain", "value"}, {"power", "value"}, {"threshold", "threshold_mW"}},
            [&] {
              if (cfg.pump.mode == PumpMode::power && !cfg.pump.threshold_mW) {
                throw ValidationError("threshold", "power mode requires threshold_mW");
              }
              if (cfg.pump.threshold_mW && !(*cfg.pump.threshold_mW > 0)) {
                throw ValidationError("threshold", "threshold power must be > 0");
              }
              pump_parameter(pump_of(cfg));
            });
  with_path("noise", {{"theta_rms", "theta_rms_deg"}}, [&] { validate(phase_noise_of(cfg)); });
  if (!(cfg.measurement.frequency_hz >= 0 && std::isfinite(cfg.measurement.frequency_hz))) {
    throw ValidationError("measurement.frequency_hz", "must be finite and >= 0");
  }
}

OpoCavity<double> cavity_of(const ExperimentConfig& cfg) {
  return {cfg.cavity.T, cfg.cavity.L, cfg.cavity.round_trip_m};
}

DetectionChain<double> detection_of(const ExperimentConfig& cfg) {
  DetectionChain<double> d{cfg.detection.zeta, cfg.detection.eta, cfg.detection.xi, 0.0};
  if (cfg.detection.dark_clearance_db) d.dark_clearance = from_db(*cfg.detection.dark_clearance_db);
  return d;
}

PumpOperatingPoint<double> pump_of(const ExperimentConfig& cfg) {
  switch (cfg.pump.mode) {
    case PumpMode::gain:
      return ClassicalGain<double>{cfg.pump.value};
    case PumpMode::x:
      return PumpParameter<double>{cfg.pump.value};
    case PumpMode::power:
      return PumpPower<double>{cfg.pump.value * 1e-3, cfg.pump.threshold_mW.value_or(0.0) * 1e-3};
  }
  throw ValidationError("pump.mode", "unknown mode");
}

SidebandPoint<double> sideband_of(const ExperimentConfig& cfg) {
  return {2 * std::numbers::pi * cfg.measurement.frequency_hz};
}

PhaseNoiseModel<double> phase_noise_of(const ExperimentConfig& cfg) {
  return {deg_to_rad(cfg.noise.theta_rms_deg)};
}

ForwardPrediction<double> predict(const ExperimentConfig& cfg) {
  return predict(cavity_of(cfg), detection_of(cfg), pump_of(cfg), sideband_of(cfg));
}

}  // namespace opo
