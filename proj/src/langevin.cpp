#include "opo/langevin.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <thread>

#include "opo/model.hpp"

namespace opo {

long LangevinConfig::samples_per_segment() const {
  if (!(segments > 0 && dt > 0)) return 0;
  return static_cast<long>(std::floor(duration / segments / dt));
}

void validate(const LangevinConfig& cfg) {
  if (!(cfg.gamma_out > 0 && std::isfinite(cfg.gamma_out))) {
    throw ValidationError("gamma_out", "output-coupler rate must be > 0");
  }
  if (!(cfg.gamma_loss >= 0 && std::isfinite(cfg.gamma_loss))) {
    throw ValidationError("gamma_loss", "loss rate must be >= 0");
  }
  validate_pump_parameter(cfg.x);
  if (!(cfg.dt > 0)) throw ValidationError("dt", "time step must be > 0");
  if (!(cfg.dt * cfg.gamma_total() * (1 + cfg.x) / 2 < max_step_decay)) {
    throw ValidationError("dt", "explicit step unstable: need dt * gamma_total * (1 + x) / 2 < 0.1");
  }
  if (!(cfg.duration >= 100 / cfg.gamma_total())) {
    throw ValidationError("duration", "must cover at least 100 cavity decay times");
  }
  if (cfg.segments < min_segments) {
    throw ValidationError("segments", "need at least 8 segments for a standard error");
  }
  if (cfg.samples_per_segment() < 16) {
    throw ValidationError("duration", "segments too short (< 16 samples each)");
  }
}

namespace {

// A requested frequency expressed as a weighted pair of periodogram bins.
struct BinInterpolation {
  int lower_column{};
  int upper_column{};
  double upper_weight{};
};

struct Plan {
  long n{};
  long burn_in{};
  Eigen::MatrixXd basis_re;  // n x bins, Hann window folded in
  Eigen::MatrixXd basis_im;
  double scale{};            // dt / sum(w^2)
  std::vector<BinInterpolation> points;
};

Plan make_plan(const LangevinConfig& cfg, std::span<const double> omegas) {
  Plan plan;
  plan.n = cfg.samples_per_segment();
  const double n = static_cast<double>(plan.n);
  const double bin_spacing = 2 * std::numbers::pi / (n * cfg.dt);

  std::map<long, int> columns;
  auto column_of = [&](long bin) {
    auto [it, inserted] = columns.emplace(bin, static_cast<int>(columns.size()));
    return it->second;
  };
  for (double omega : omegas) {
    if (!(omega >= 0 && std::isfinite(omega))) throw ValidationError("omega", "frequencies must be >= 0");
    const double b = omega / bin_spacing;
    auto k0 = static_cast<long>(std::floor(b));
    double frac = b - static_cast<double>(k0);
    if (frac < 1e-12) frac = 0;
    if (frac > 1 - 1e-12) ++k0, frac = 0;
    const long k1 = frac > 0 ? k0 + 1 : k0;
    if (k1 > plan.n / 2) {
      throw ValidationError("omega", "frequency above the Nyquist limit of the integration step");
    }
    plan.points.push_back({column_of(k0), column_of(k1), frac});
  }

  const auto bins = static_cast<Eigen::Index>(columns.size());
  plan.basis_re.resize(plan.n, bins);
  plan.basis_im.resize(plan.n, bins);
  double window_power = 0;
  for (long i = 0; i < plan.n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * static_cast<double>(i) / n);
    window_power += w * w;
    for (const auto& [bin, col] : columns) {
      // exact integer phase index keeps twiddles accurate for long segments
      const long phase_index = (bin * i) % plan.n;
      const double phase = 2 * std::numbers::pi * static_cast<double>(phase_index) / n;
      plan.basis_re(i, col) = w * std::cos(phase);
      plan.basis_im(i, col) = -w * std::sin(phase);
    }
  }
  plan.scale = cfg.dt / window_power;

  // Let the slower quadrature relax for ten decay times before recording.
  const double slowest = cfg.gamma_total() * (1 - cfg.x) / 2;
  plan.burn_in = std::min(static_cast<long>(std::ceil(10 / (slowest * cfg.dt))), 4 * plan.n);
  return plan;
}

std::mt19937_64 port_stream(std::uint64_t seed, int segment, int port) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(segment), static_cast<std::uint32_t>(port)};
  return std::mt19937_64(seq);
}

// Rows: requested points; columns: (+, -).
Eigen::MatrixX2d simulate_segment(const LangevinConfig& cfg, const Plan& plan, int segment) {
  constexpr int output_port = 0;
  constexpr int loss_port = 1;
  auto out_rng = port_stream(cfg.seed, segment, output_port);
  auto loss_rng = port_stream(cfg.seed, segment, loss_port);
  std::normal_distribution<double> out_normal;
  std::normal_distribution<double> loss_normal;

  const double gamma = cfg.gamma_total();
  const double decay_plus = 1 - gamma * (1 - cfg.x) / 2 * cfg.dt;
  const double decay_minus = 1 - gamma * (1 + cfg.x) / 2 * cfg.dt;
  const double sqrt_dt = std::sqrt(cfg.dt);
  const double coupling_out = std::sqrt(cfg.gamma_out);
  const double coupling_loss = std::sqrt(cfg.gamma_loss);
  const bool lossy = cfg.gamma_loss > 0;

  double x_plus = 0, x_minus = 0;
  Eigen::MatrixX2d output(plan.n, 2);

  const long total = plan.burn_in + plan.n;
  for (long k = 0; k < total; ++k) {
    const double dw_out_plus = sqrt_dt * out_normal(out_rng);
    const double dw_out_minus = sqrt_dt * out_normal(out_rng);
    double drive_plus = coupling_out * dw_out_plus;
    double drive_minus = coupling_out * dw_out_minus;
    if (lossy) {
      drive_plus += coupling_loss * sqrt_dt * loss_normal(loss_rng);
      drive_minus += coupling_loss * sqrt_dt * loss_normal(loss_rng);
    }
    const double next_plus = decay_plus * x_plus + drive_plus;
    const double next_minus = decay_minus * x_minus + drive_minus;
    if (k >= plan.burn_in) {
      const long i = k - plan.burn_in;
      output(i, 0) = coupling_out * 0.5 * (x_plus + next_plus) - dw_out_plus / cfg.dt;
      output(i, 1) = coupling_out * 0.5 * (x_minus + next_minus) - dw_out_minus / cfg.dt;
    }
    x_plus = next_plus;
    x_minus = next_minus;
  }

  const Eigen::MatrixX2d re = plan.basis_re.transpose() * output;
  const Eigen::MatrixX2d im = plan.basis_im.transpose() * output;
  const Eigen::MatrixX2d periodogram = plan.scale * (re.array().square() + im.array().square()).matrix();

  Eigen::MatrixX2d estimate(static_cast<Eigen::Index>(plan.points.size()), 2);
  for (std::size_t p = 0; p < plan.points.size(); ++p) {
    const auto& pt = plan.points[p];
    estimate.row(static_cast<Eigen::Index>(p)) =
        (1 - pt.upper_weight) * periodogram.row(pt.lower_column) + pt.upper_weight * periodogram.row(pt.upper_column);
  }
  return estimate;
}

}  // namespace

SpectrumEstimate simulate_output_spectrum(const LangevinConfig& cfg, std::span<const double> omegas,
                                          unsigned threads) {
  validate(cfg);
  const Plan plan = make_plan(cfg, omegas);

  std::vector<Eigen::MatrixX2d> per_segment(static_cast<std::size_t>(cfg.segments));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int s = next++; s < cfg.segments; s = next++) {
      per_segment[static_cast<std::size_t>(s)] = simulate_segment(cfg, plan, s);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.segments));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Fixed segment order for the sums so the result is independent of scheduling.
  const auto n_points = static_cast<Eigen::Index>(omegas.size());
  Eigen::MatrixX2d sum = Eigen::MatrixX2d::Zero(n_points, 2);
  for (const auto& e : per_segment) sum += e;
  const double m = cfg.segments;
  const Eigen::MatrixX2d mean = sum / m;
  Eigen::MatrixX2d sq = Eigen::MatrixX2d::Zero(n_points, 2);
  for (const auto& e : per_segment) sq += (e - mean).array().square().matrix();
  const Eigen::MatrixX2d stderr_ = (sq / (m - 1) / m).cwiseSqrt();

  SpectrumEstimate result;
  result.bin_spacing = 2 * std::numbers::pi / (static_cast<double>(plan.n) * cfg.dt);
  result.samples_per_segment = plan.n;
  result.segments = cfg.segments;
  result.seed = cfg.seed;
  for (Eigen::Index p = 0; p < n_points; ++p) {
    result.points.push_back({omegas[static_cast<std::size_t>(p)], mean(p, 0), mean(p, 1), stderr_(p, 0),
                             stderr_(p, 1)});
  }
  return result;
}

}  // namespace opo
