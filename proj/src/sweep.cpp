#include "opo/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace opo {

std::string format_g6(double v) {
  // snprintf honours LC_NUMERIC; the tools never call setlocale, so "C" applies.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double threshold_from_anchor(double power, double gain) {
  if (!(power > 0)) throw ValidationError("anchor", "anchor pump power must be > 0");
  const double x = pump_parameter<double>(ClassicalGain<double>{gain});
  if (!(x > 0)) throw ValidationError("anchor", "anchor gain must be > 1 to fix a threshold");
  return power / (x * x);
}

std::vector<SweepRow> pump_sweep(const ExperimentConfig& cfg, double threshold, double pmin, double pmax,
                                 int steps, const PhaseNoiseModel<double>& jitter, Degradation form) {
  if (steps < 1) throw ValidationError("steps", "must be >= 1");
  if (!(pmin >= 0)) throw ValidationError("pmin", "must be >= 0");
  if (!(pmax >= pmin)) throw ValidationError("pmax", "must be >= pmin");
  if (!(threshold > 0)) throw ValidationError("threshold", "threshold power must be > 0");
  if (!(pmax < threshold)) throw ValidationError("pmax", "sweep reaches the oscillation threshold");

  const auto cavity = cavity_of(cfg);
  const double alpha = detection_efficiency(detection_of(cfg));
  const double rho = escape_efficiency(cavity);
  const double Omega = detuning(sideband_of(cfg), cavity);

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double p = steps == 1 ? pmin : pmin + (pmax - pmin) * i / (steps - 1);
    SweepRow row;
    row.pump_mW = p * 1e3;
    row.x = pump_parameter<double>(PumpPower<double>{p, threshold});
    row.gain = classical_gain(row.x);
    row.variances = forward_variances(alpha, rho, row.x, Omega);
    row.corrected = degrade(row.variances, jitter, form);
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << sweep_csv_header << '\n';
  for (const auto& r : rows) {
    os << format_g6(r.pump_mW) << ',' << format_g6(r.x) << ',' << format_g6(r.gain) << ','
       << format_g6(r.variances.plus()) << ',' << format_g6(r.variances.minus()) << ','
       << format_g6(r.variances.plus_db()) << ',' << format_g6(r.variances.minus_db()) << ','
       << format_g6(r.corrected.plus_db()) << ',' << format_g6(r.corrected.minus_db()) << '\n';
  }
}

}  // namespace opo
