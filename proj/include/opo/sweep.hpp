#ifndef OPO_SWEEP_HPP
#define OPO_SWEEP_HPP

#include <iosfwd>
#include <string_view>
#include <vector>

#include "opo/config.hpp"

namespace opo {

/// Column header of the pump-power sweep CSV.
inline constexpr std::string_view sweep_csv_header =
    "pump_mW,x,G,R_plus,R_minus,R_plus_dB,R_minus_dB,Rp_corr_dB,Rm_corr_dB";

struct SweepRow {
  double pump_mW{};
  double x{};
  double gain{};
  QuadratureVariances<double> variances;
  QuadratureVariances<double> corrected;
};

/// Threshold power (W) that puts the pump parameter of gain G at power P,
/// P_th = P / x^2 with x = 1 - 1/sqrt(G).
double threshold_from_anchor(double power, double gain);

/// Evaluates the forward model and the jitter correction on `steps` evenly
/// spaced pump powers in [pmin, pmax] (watts), ascending. The cavity,
/// detection and sideband come from `cfg`; its pump entry is ignored.
std::vector<SweepRow> pump_sweep(const ExperimentConfig& cfg, double threshold, double pmin, double pmax,
                                 int steps, const PhaseNoiseModel<double>& jitter,
                                 Degradation form = Degradation::exact);

/// Writes header and rows: LF line endings, '.' decimal point, 6 significant digits.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Locale-independent %.6g.
std::string format_g6(double v);

}  // namespace opo

#endif  // OPO_SWEEP_HPP
