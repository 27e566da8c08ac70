#include "opo/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "opo/calibration.hpp"
#include "opo/config.hpp"
#include "opo/dataset.hpp"
#include "opo/langevin.hpp"
#include "opo/sweep.hpp"

namespace opo::cli {

namespace {

using nlohmann::json;

struct PredictArgs {
  std::string config;
  bool corrected = false;
  bool approx = false;
  std::string format = "text";
};

struct SweepArgs {
  std::string config;
  double pmin_mW = 0;
  double pmax_mW = 0;
  int steps = 11;
  std::optional<double> theta_deg;
  std::optional<std::string> anchor;
  std::optional<std::string> out;
  bool approx = false;
};

struct CorrectArgs {
  double level_db = 0;
  std::optional<double> clearance_db;
  std::optional<double> clearance;
  bool inverse = false;
};

struct FitArgs {
  std::string config;
  double sq_db = 0;
  std::optional<double> asq_db;
  bool joint = false;
  bool approx = false;
  bool raw = false;
};

struct OracleArgs {
  std::string config;
  std::uint64_t seed = 1;
  int segments = 200;
  std::optional<double> duration;
  std::optional<double> dt;
  std::vector<double> freq_hz;
  std::vector<double> detuning;
  unsigned threads = 0;
  bool assert_model = false;
  std::optional<std::string> out;
};

struct PaperArgs {
  bool list = false;
  bool check = false;
  std::optional<std::string> dataset;
};

Degradation form_of(bool approx) { return approx ? Degradation::approx : Degradation::exact; }

// Writes to --out when given, otherwise to the report stream.
template <typename F>
void emit(const std::optional<std::string>& path, std::ostream& out, F&& write) {
  if (!path) {
    write(out);
    return;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw ValidationError("out", "cannot write " + *path);
  write(file);
}

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(a.config);
  const auto p = predict(cfg);
  const auto jitter = phase_noise_of(cfg);
  if (a.corrected && beyond_small_angle(jitter)) {
    err << "warning: theta_rms above 45 deg, the small-angle picture of phase jitter does not apply\n";
  }
  const auto corrected = degrade(p.variances, jitter, form_of(a.approx));

  if (a.format == "json") {
    json j = {{"alpha", p.alpha},           {"rho", p.rho},
              {"x", p.x},                   {"gain", p.gain},
              {"gamma", p.gamma},           {"Omega", p.Omega},
              {"R_plus", p.variances.plus()}, {"R_minus", p.variances.minus()},
              {"R_plus_dB", p.variances.plus_db()}, {"R_minus_dB", p.variances.minus_db()}};
    if (a.corrected) {
      j["theta_rms_deg"] = cfg.noise.theta_rms_deg;
      j["degradation"] = a.approx ? "approx" : "exact";
      j["Rp_corr"] = corrected.plus();
      j["Rm_corr"] = corrected.minus();
      j["Rp_corr_dB"] = corrected.plus_db();
      j["Rm_corr_dB"] = corrected.minus_db();
    }
    out << j.dump(2) << '\n';
  } else if (a.format == "csv") {
    out << "alpha,rho,x,G,gamma,Omega,R_plus,R_minus,R_plus_dB,R_minus_dB";
    if (a.corrected) out << ",Rp_corr_dB,Rm_corr_dB";
    out << '\n';
    for (double v : {p.alpha, p.rho, p.x, p.gain, p.gamma, p.Omega, p.variances.plus(), p.variances.minus(),
                     p.variances.plus_db()}) {
      out << format_g6(v) << ',';
    }
    out << format_g6(p.variances.minus_db());
    if (a.corrected) out << ',' << format_g6(corrected.plus_db()) << ',' << format_g6(corrected.minus_db());
    out << '\n';
  } else {
    auto line = [&](const char* name, double v, const char* unit = "") {
      out << name << std::string(12 - std::strlen(name), ' ') << format_g6(v) << unit << '\n';
    };
    line("alpha", p.alpha);
    line("rho", p.rho);
    line("x", p.x);
    line("G", p.gain);
    line("gamma", p.gamma, " rad/s");
    line("Omega", p.Omega);
    line("R_plus", p.variances.plus());
    line("R_minus", p.variances.minus());
    line("R_plus_dB", p.variances.plus_db(), " dB");
    line("R_minus_dB", p.variances.minus_db(), " dB");
    if (a.corrected) {
      line("theta_rms", cfg.noise.theta_rms_deg, a.approx ? " deg (approx)" : " deg (exact)");
      line("Rp_corr_dB", corrected.plus_db(), " dB");
      line("Rm_corr_dB", corrected.minus_db(), " dB");
    }
  }
  return success;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream&) {
  const auto cfg = load_config(a.config);
  double threshold = 0;
  if (a.anchor) {
    const auto colon = a.anchor->find(':');
    if (colon == std::string::npos) throw ValidationError("anchor", "expected P_mW:G");
    double p_mW = 0, gain = 0;
    try {
      p_mW = std::stod(a.anchor->substr(0, colon));
      gain = std::stod(a.anchor->substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("anchor", "expected P_mW:G");
    }
    threshold = threshold_from_anchor(p_mW * 1e-3, gain);
  } else if (cfg.pump.threshold_mW) {
    threshold = *cfg.pump.threshold_mW * 1e-3;
  } else {
    throw ValidationError("pump.threshold_mW", "sweep needs a threshold: set it in the config or pass --anchor P:G");
  }
  const PhaseNoiseModel<double> jitter =
      a.theta_deg ? PhaseNoiseModel<double>{deg_to_rad(*a.theta_deg)} : phase_noise_of(cfg);
  const auto rows = pump_sweep(cfg, threshold, a.pmin_mW * 1e-3, a.pmax_mW * 1e-3, a.steps, jitter, form_of(a.approx));
  emit(a.out, out, [&](std::ostream& os) { write_sweep_csv(os, rows); });
  return success;
}

int cmd_correct(const CorrectArgs& a, std::ostream& out, std::ostream&) {
  if (a.clearance_db.has_value() == a.clearance.has_value()) {
    throw ValidationError("clearance", "give exactly one of --clearance-db or --clearance");
  }
  const double d = a.clearance ? *a.clearance : from_db(*a.clearance_db);
  const double level = a.inverse ? dark_noise_uncorrect(a.level_db, d) : dark_noise_correct(a.level_db, d);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", level);
  out << buf << '\n';
  return success;
}

json fit_json(const FitResult& r, const std::string& status) {
  json j;
  j["theta_rms_deg"] = rad_to_deg(r.theta_rms);
  j["x"] = r.x ? json(*r.x) : json(nullptr);
  j["gain"] = r.x ? json(classical_gain(*r.x)) : json(nullptr);
  j["residual_db2"] = r.residual;
  j["iterations"] = r.iterations;
  j["status"] = status;
  return j;
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(a.config);
  MeasuredLevels m;
  m.squeezing_db = a.sq_db;
  m.anti_squeezing_db = a.asq_db;
  if (a.raw) {
    if (!cfg.detection.dark_clearance_db) {
      throw ValidationError("detection.dark_clearance_db", "--raw needs the detector dark-noise clearance");
    }
    const double d = from_db(*cfg.detection.dark_clearance_db);
    m.squeezing_db = dark_noise_correct(m.squeezing_db, d);
    if (m.anti_squeezing_db) m.anti_squeezing_db = dark_noise_correct(*m.anti_squeezing_db, d);
  }
  FitOptions options;
  options.model = form_of(a.approx);

  FitResult result;
  try {
    if (a.joint) {
      const auto cavity = cavity_of(cfg);
      result = fit_joint(m, detection_efficiency(detection_of(cfg)), escape_efficiency(cavity),
                         detuning(sideband_of(cfg), cavity), options);
    } else {
      result = fit_theta(m, predict(cfg).variances, options);
    }
  } catch (const FitNotConverged& e) {
    err << "error: " << e.what() << '\n';
    out << fit_json(e.best(), "not_converged").dump(2) << '\n';
    return infeasible;
  }
  out << fit_json(result, to_string(result.status)).dump(2) << '\n';
  return result.status == FitStatus::ok ? success : infeasible;
}

int cmd_oracle(const OracleArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(a.config);
  const auto cavity = cavity_of(cfg);
  const double gamma = cavity_decay_rate(cavity);
  const double x = pump_parameter(pump_of(cfg));
  const double rho = escape_efficiency(cavity);

  LangevinConfig lc;
  lc.gamma_out = speed_of_light<double> * cfg.cavity.T / cfg.cavity.round_trip_m;
  lc.gamma_loss = speed_of_light<double> * cfg.cavity.L / cfg.cavity.round_trip_m;
  lc.x = x;
  lc.dt = a.dt.value_or(0.02 / gamma);
  lc.segments = a.segments;
  lc.duration = a.duration.value_or(a.segments * 500.0 / gamma);
  lc.seed = a.seed;

  std::vector<double> omegas;
  for (double f : a.freq_hz) omegas.push_back(2 * std::numbers::pi * f);
  for (double d : a.detuning) omegas.push_back(d * gamma);
  if (omegas.empty()) omegas.push_back(sideband_of(cfg).omega);

  const auto est = simulate_output_spectrum(lc, omegas, a.threads);
  err << "oracle: " << est.segments << " segments x " << est.samples_per_segment
      << " samples, bin spacing " << format_g6(est.bin_spacing) << " rad/s\n";

  bool all_within = true;
  emit(a.out, out, [&](std::ostream& os) {
    os << "frequency_hz,Omega,x,G,R_plus,R_minus,R_plus_dB,R_minus_dB,model_R_plus_dB,model_R_minus_dB,"
          "stderr_plus,stderr_minus,segments,seed\n";
    for (const auto& pt : est.points) {
      const double Omega = pt.omega / gamma;
      const auto model = forward_variances(1.0, rho, x, Omega);
      all_within = all_within && std::abs(pt.r_plus - model.plus()) <= 3 * pt.stderr_plus &&
                   std::abs(pt.r_minus - model.minus()) <= 3 * pt.stderr_minus;
      os << format_g6(pt.omega / (2 * std::numbers::pi)) << ',' << format_g6(Omega) << ',' << format_g6(x) << ','
         << format_g6(classical_gain(x)) << ',' << format_g6(pt.r_plus) << ',' << format_g6(pt.r_minus) << ','
         << format_g6(to_db(pt.r_plus)) << ',' << format_g6(to_db(pt.r_minus)) << ','
         << format_g6(model.plus_db()) << ',' << format_g6(model.minus_db()) << ',' << format_g6(pt.stderr_plus)
         << ',' << format_g6(pt.stderr_minus) << ',' << est.segments << ',' << est.seed << '\n';
    }
  });
  if (a.assert_model && !all_within) {
    err << "oracle: simulated spectrum misses the output-variance model by more than 3 standard errors\n";
    return oracle_assertion;
  }
  return success;
}

int cmd_paper(const PaperArgs& a, std::ostream& out, std::ostream&) {
  const PaperDataset data = a.dataset ? load_dataset(*a.dataset) : embedded_dataset();
  if (a.list) {
    for (const auto& r : data.records) {
      out << "[" << r.id << "] " << r.description << '\n';
      for (const auto& [key, q] : r.quantities) {
        out << "  " << key << " = " << format_g6(q.value);
        if (q.uncertainty) out << " +- " << format_g6(*q.uncertainty);
        if (!q.unit.empty() && q.unit != "1") out << ' ' << q.unit;
        out << "    <" << q.anchor << ">\n";
      }
    }
  }
  if (!a.check) return success;

  bool all = true;
  for (const auto& c : run_paper_checks(data)) {
    all = all && c.pass;
    out << (c.pass ? "PASS " : "FAIL ") << c.id << ' ' << c.title << ": " << c.detail << '\n';
  }
  // The second crystal is reported, not asserted: only its corrected levels are published.
  for (const auto& r : data.records) {
    if (r.id == operating_point_record || !r.quantities.contains("inferred_sq_db") ||
        !r.quantities.contains("inferred_asq_db")) {
      continue;
    }
    const auto& op = data.record(operating_point_record);
    const OpoCavity<double> cavity{op.at("T").value, op.at("L").value, op.at("round_trip_m").value};
    const DetectionChain<double> chain{op.at("zeta").value, op.at("eta").value, op.at("xi").value};
    const double Omega =
        detuning(SidebandPoint<double>{2 * std::numbers::pi * op.at("frequency_hz").value}, cavity);
    try {
      MeasuredLevels m;
      m.squeezing_db = r.at("inferred_sq_db").value;
      m.anti_squeezing_db = r.at("inferred_asq_db").value;
      const auto fit = fit_joint(m, detection_efficiency(chain), escape_efficiency(cavity), Omega);
      out << "INFO " << r.id << " joint fit: x = " << format_g6(*fit.x) << " (G = " << format_g6(classical_gain(*fit.x))
          << "), theta_rms = " << format_g6(rad_to_deg(fit.theta_rms)) << " deg, residual "
          << format_g6(fit.residual) << " dB^2\n";
    } catch (const FitNotConverged& e) {
      out << "INFO " << r.id << " joint fit did not converge: " << e.what() << '\n';
    }
  }
  out << (all ? "ALL PASS" : "SOME CHECKS FAILED") << '\n';
  return all ? success : check_failed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Squeezed-vacuum OPO model: prediction, correction, fitting, sweeps and a Langevin oracle",
               "opo-squeeze"};
  app.require_subcommand(1);

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Forward prediction at the configured operating point");
  predict->add_option("config", predict_args.config, "Experiment config (JSON)")->required();
  predict->add_flag("--corrected", predict_args.corrected, "Apply rms phase-jitter degradation");
  predict->add_flag("--approx", predict_args.approx, "Use the small-angle jitter form instead of the exact average");
  predict->add_option("--format", predict_args.format, "text | json | csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Pump-power sweep written as CSV");
  sweep->add_option("config", sweep_args.config, "Experiment config (JSON)")->required();
  sweep->add_option("--pmin", sweep_args.pmin_mW, "Lowest pump power, mW")->required();
  sweep->add_option("--pmax", sweep_args.pmax_mW, "Highest pump power, mW")->required();
  sweep->add_option("--steps", sweep_args.steps, "Number of pump powers")->capture_default_str();
  sweep->add_option("--theta-deg", sweep_args.theta_deg, "rms phase jitter, degrees (default: config)");
  sweep->add_option("--anchor", sweep_args.anchor, "Threshold from one measured point, P_mW:G");
  sweep->add_option("--out", sweep_args.out, "CSV path (default: stdout)");
  sweep->add_flag("--approx", sweep_args.approx, "Small-angle jitter form for the corrected columns");

  CorrectArgs correct_args;
  auto* correct = app.add_subcommand("correct", "Remove detector circuit noise from a reading");
  correct->add_option("--level-db", correct_args.level_db, "Measured level, dB re shot noise")
      ->required();
  correct->add_option("--clearance-db", correct_args.clearance_db, "Dark noise re shot noise, dB");
  correct->add_option("--clearance", correct_args.clearance, "Dark noise re shot noise, linear");
  correct->add_flag("--inverse", correct_args.inverse, "Add the dark noise back (true level -> reading)");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit rms phase jitter (and optionally x) to measured levels");
  fit->add_option("config", fit_args.config, "Experiment config (JSON)")->required();
  fit->add_option("--sq-db", fit_args.sq_db, "Measured squeezing, dB")->required();
  fit->add_option("--asq-db", fit_args.asq_db, "Measured anti-squeezing, dB");
  fit->add_flag("--joint", fit_args.joint, "Fit pump parameter and jitter together");
  fit->add_flag("--approx", fit_args.approx, "Small-angle jitter form");
  fit->add_flag("--raw", fit_args.raw, "Levels are raw readings; subtract the config's dark noise first");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Langevin simulation of the output spectrum");
  oracle->add_option("config", oracle_args.config, "Experiment config (JSON)")->required();
  oracle->add_option("--seed", oracle_args.seed, "RNG seed")->capture_default_str();
  oracle->add_option("--segments", oracle_args.segments, "Periodogram segments")->capture_default_str();
  oracle->add_option("--duration", oracle_args.duration, "Total simulated time, s (default: 500/gamma per segment)");
  oracle->add_option("--dt", oracle_args.dt, "Integration step, s (default: 0.02/gamma)");
  oracle->add_option("--freq-hz", oracle_args.freq_hz, "Sideband frequencies, Hz");
  oracle->add_option("--detuning", oracle_args.detuning, "Sideband frequencies as Omega = omega/gamma");
  oracle->add_option("--threads", oracle_args.threads, "Worker threads (0 = all cores)");
  oracle->add_flag("--assert", oracle_args.assert_model, "Exit 4 if any point misses the model by > 3 stderr");
  oracle->add_option("--out", oracle_args.out, "CSV path (default: stdout)");

  PaperArgs paper_args;
  auto* paper = app.add_subcommand("paper", "Embedded published dataset and reproduction check");
  paper->add_flag("--list", paper_args.list, "Print the dataset with source anchors");
  paper->add_flag("--check", paper_args.check, "Reproduce the operating point, PASS/FAIL per check");
  paper->add_option("--dataset", paper_args.dataset, "Use this dataset file instead of the embedded one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? success : validation_error;
  }

  try {
    if (*predict) return cmd_predict(predict_args, out, err);
    if (*sweep) return cmd_sweep(sweep_args, out, err);
    if (*correct) return cmd_correct(correct_args, out, err);
    if (*fit) return cmd_fit(fit_args, out, err);
    if (*oracle) return cmd_oracle(oracle_args, out, err);
    if (*paper) {
      if (!paper_args.list && !paper_args.check) throw ValidationError("paper", "pass --list and/or --check");
      return cmd_paper(paper_args, out, err);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return validation_error;
  } catch (const InfeasibleReading& e) {
    err << "error: " << e.what() << '\n';
    return infeasible;
  }
  return validation_error;
}

}  // namespace opo::cli
