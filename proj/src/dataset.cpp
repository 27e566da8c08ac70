#include "opo/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "opo/calibration.hpp"
#include "opo/model.hpp"
#include "opo/phase_noise.hpp"

namespace opo {

using nlohmann::json;

namespace {

// Generated from data/paper_dataset.json at configure time.
constexpr const char* embedded_json =
#include "embedded_dataset.inc"
    ;

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

}  // namespace

const PaperQuantity& PaperRecord::at(const std::string& key) const {
  auto it = quantities.find(key);
  if (it == quantities.end()) throw ValidationError(id + "." + key, "missing from dataset record");
  return it->second;
}

const PaperRecord& PaperDataset::record(const std::string& id) const {
  for (const auto& r : records) {
    if (r.id == id) return r;
  }
  throw ValidationError(id, "no such dataset record");
}

PaperDataset parse_dataset(const json& j) {
  if (!j.is_object() || !j.contains("records") || !j.at("records").is_array()) {
    throw ValidationError("records", "dataset must hold a \"records\" array");
  }
  PaperDataset data;
  for (const auto& r : j.at("records")) {
    PaperRecord rec;
    rec.id = r.at("id").get<std::string>();
    rec.description = r.value("description", "");
    for (const auto& [key, q] : r.at("quantities").items()) {
      const std::string path = rec.id + "." + key;
      if (!q.contains("value") || !q.at("value").is_number()) throw ValidationError(path, "value must be a number");
      if (!q.contains("anchor") || !q.at("anchor").is_string() || q.at("anchor").get<std::string>().empty()) {
        throw ValidationError(path, "every quantity needs a source anchor");
      }
      PaperQuantity pq;
      pq.value = q.at("value").get<double>();
      if (q.contains("uncertainty")) pq.uncertainty = q.at("uncertainty").get<double>();
      pq.unit = q.value("unit", "");
      pq.anchor = q.at("anchor").get<std::string>();
      rec.quantities.emplace(key, std::move(pq));
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

PaperDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("dataset", "cannot open " + path.string());
  try {
    return parse_dataset(json::parse(in));
  } catch (const json::exception& e) {
    throw ValidationError("dataset", std::string("invalid dataset JSON: ") + e.what());
  }
}

const PaperDataset& embedded_dataset() {
  static const PaperDataset data = parse_dataset(json::parse(embedded_json));
  return data;
}

std::vector<CheckOutcome> run_paper_checks(const PaperDataset& data) {
  const PaperRecord& rec = data.record(operating_point_record);
  auto v = [&](const char* key) { return rec.at(key).value; };

  std::vector<CheckOutcome> out;
  auto within = [&](const char* id, const char* title, double got, double quoted, double tol, const char* unit) {
    const bool pass = std::abs(got - quoted) <= tol;
    out.push_back({id, title, pass, fmt("%.4f%s%s (quoted %.4g +- %.3g)", got, *unit ? " " : "", unit, quoted, tol)});
  };

  const OpoCavity<double> cavity{v("T"), v("L"), v("round_trip_m")};
  const DetectionChain<double> chain{v("zeta"), v("eta"), v("xi")};
  const double rho = escape_efficiency(cavity);
  const double alpha = detection_efficiency(chain);
  const double Omega = detuning(SidebandPoint<double>{2 * std::numbers::pi * v("frequency_hz")}, cavity);
  const double x = pump_parameter<double>(ClassicalGain<double>{v("gain")});

  within("C1", "escape efficiency rho", rho, v("rho"), 0.001, "");
  within("C2", "detection efficiency alpha", alpha, v("alpha"), 0.001, "");
  within("C3", "detuning Omega", Omega, v("Omega"), 0.001, "");

  const auto theory = forward_variances(alpha, rho, x, Omega);
  within("C4", "theory squeezing", theory.minus_db(), v("theory_sq_db"), 0.10, "dB");
  within("C4", "theory anti-squeezing", theory.plus_db(), v("theory_asq_db"), 0.05, "dB");

  const PhaseNoiseModel<double> jitter{deg_to_rad(v("theta_rms_deg"))};
  const auto corrected = degrade_exact(theory, jitter);
  within("C5", "phase-noise corrected squeezing", corrected.minus_db(), v("corrected_sq_db"), 0.10, "dB");
  within("C5", "phase-noise corrected anti-squeezing", corrected.plus_db(), v("corrected_asq_db"), 0.05, "dB");

  const auto& theta = rec.at("theta_rms_deg");
  MeasuredLevels inferred;
  inferred.squeezing_db = v("inferred_sq_db");
  const auto fit = fit_theta(inferred, theory);
  const double fitted_deg = rad_to_deg(fit.theta_rms);
  const double band = theta.uncertainty.value_or(0.0);
  out.push_back({"C6", "jitter fit to inferred squeezing",
                 fit.status == FitStatus::ok && std::abs(fitted_deg - theta.value) <= band,
                 fmt("%.3f deg, status %s (quoted %.3g +- %.3g deg)", fitted_deg, to_string(fit.status).c_str(),
                     theta.value, band)});
  return out;
}

}  // namespace opo
