#include "srfm/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "srfm/units.hpp"

namespace srfm {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

// Vertex of the parabola through three points (Lagrange form); falls back to
// the middle point when the triple is collinear.
Extremum parabolic_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double a0 = y0 / ((x0 - x1) * (x0 - x2));
  const double a1 = y1 / ((x1 - x0) * (x1 - x2));
  const double a2 = y2 / ((x2 - x0) * (x2 - x1));
  const double A = a0 + a1 + a2;
  if (A == 0) return {x1, y1};
  const double B = -(a0 * (x1 + x2) + a1 * (x0 + x2) + a2 * (x0 + x1));
  const double C = a0 * x1 * x2 + a1 * x0 * x2 + a2 * x0 * x1;
  const double xvert = -B / (2.0 * A);
  const double yvert = (A * xvert + B) * xvert + C;
  return {xvert, yvert};
}

}  // namespace

ExtremaReport find_extrema(std::span<const double> signal, std::span<const double> grid_ghz) {
  require(signal.size() == grid_ghz.size(), "find_extrema: signal/grid size mismatch");
  require(signal.size() >= 5, "find_extrema: at least 5 points required");

  ExtremaReport report;
  const std::size_t n = signal.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const bool is_max = signal[i] > signal[i + 1] && signal[i] > signal[i - 1];
    const bool is_min = signal[i] < signal[i + 1] && signal[i] < signal[i - 1];
    if (!is_max && !is_min) continue;
    const Extremum e = parabolic_vertex(grid_ghz[i - 1], signal[i - 1], grid_ghz[i], signal[i],
                                        grid_ghz[i + 1], signal[i + 1]);
    if (is_max)
      report.maxima.push_back(e);
    else
      report.minima.push_back(e);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = signal[i];
    const double b = signal[i + 1];
    if (a == 0.0 && b == 0.0) continue;
    if (a == 0.0) {
      if (i > 0 && signal[i - 1] * b < 0) report.zero_crossings.push_back({grid_ghz[i], 0.0});
      continue;
    }
    if (a * b < 0) {
      const double x = grid_ghz[i] - a * (grid_ghz[i + 1] - grid_ghz[i]) / (b - a);
      report.zero_crossings.push_back({x, 0.0});
    }
  }
  if (!report.maxima.empty()) {
    report.principal_max = *std::max_element(
        report.maxima.begin(), report.maxima.end(),
        [](const Extremum& lhs, const Extremum& rhs) { return lhs.value < rhs.value; });
  }
  if (!report.minima.empty()) {
    report.principal_min = *std::min_element(
        report.minima.begin(), report.minima.end(),
        [](const Extremum& lhs, const Extremum& rhs) { return lhs.value < rhs.value; });
  }
  if (report.principal_max && report.principal_min)
    report.delta_mm_ghz =
        std::abs(report.principal_max->position_ghz - report.principal_min->position_ghz);
  return report;
}

double width_from_mm(double delta_mm_ghz) {
  require(delta_mm_ghz > 0, "width_from_mm: interval must be positive");
  return 0.87 * delta_mm_ghz;
}

double lorentz_derivative(double x, double halfwidth) {
  const double r = x * x + halfwidth * halfwidth;
  return -2.0 * halfwidth * halfwidth * x / (r * r);
}

double dispersion_derivative(double x, double halfwidth) {
  const double r = x * x + halfwidth * halfwidth;
  return halfwidth * (halfwidth * halfwidth - x * x) / (r * r);
}

double doublet_component(double x, double halfwidth, double phase) {
  return std::cos(phase) * lorentz_derivative(x, halfwidth) +
         std::sin(phase) * dispersion_derivative(x, halfwidth);
}

namespace {

constexpr int kNP = 8;  // A1 A2 center splitting halfwidth phase b0 b1

struct DoubletParams {
  std::array<double, kNP> p;

  double model(double nu) const {
    const double x1 = nu - p[2] + p[3] / 2.0;
    const double x2 = nu - p[2] - p[3] / 2.0;
    return p[0] * doublet_component(x1, p[4], p[5]) + p[1] * doublet_component(x2, p[4], p[5]) +
           p[6] + p[7] * (nu - p[2]);
  }
};

// Partials of the component shapes.
double lorentz_deriv_dx(double x, double w) {
  const double r = x * x + w * w;
  return -2.0 * w * w * (w * w - 3.0 * x * x) / (r * r * r);
}
double lorentz_deriv_dw(double x, double w) {
  const double r = x * x + w * w;
  return -4.0 * w * x * (x * x - w * w) / (r * r * r);
}
double dispersion_deriv_dx(double x, double w) {
  const double r = x * x + w * w;
  return -2.0 * x * w * (3.0 * w * w - x * x) / (r * r * r);
}
double dispersion_deriv_dw(double x, double w) {
  const double r = x * x + w * w;
  const double w2 = w * w, x2 = x * x;
  return (-w2 * w2 + 6.0 * w2 * x2 - x2 * x2) / (r * r * r);
}

double component_dx(double x, double w, double phase) {
  return std::cos(phase) * lorentz_deriv_dx(x, w) + std::sin(phase) * dispersion_deriv_dx(x, w);
}
double component_dw(double x, double w, double phase) {
  return std::cos(phase) * lorentz_deriv_dw(x, w) + std::sin(phase) * dispersion_deriv_dw(x, w);
}
double component_dphase(double x, double w, double phase) {
  return -std::sin(phase) * lorentz_derivative(x, w) + std::cos(phase) * dispersion_derivative(x, w);
}

double sum_squared_residuals(const DoubletParams& q, std::span<const double> y,
                             std::span<const double> x) {
  double ssr = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = q.model(x[i]) - y[i];
    ssr += r * r;
  }
  return ssr;
}

template <int N>
bool solve_normal(std::array<std::array<double, N>, N> a, std::array<double, N> b,
                  std::array<double, N>& out) {
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    for (int row = col + 1; row < N; ++row)
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    if (a[pivot][col] == 0) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (int row = col + 1; row < N; ++row) {
      const double f = a[row][col] / a[col][col];
      for (int k = col; k < N; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  for (int row = N - 1; row >= 0; --row) {
    double acc = b[row];
    for (int k = row + 1; k < N; ++k) acc -= a[row][k] * out[k];
    out[row] = acc / a[row][row];
    if (!std::isfinite(out[row])) return false;
  }
  return true;
}

// Amplitudes, mixing phase and baseline enter linearly once the shape
// parameters (c, s, w) are fixed: solve for per-component derivative and
// dispersion weights plus the baseline, then reduce to a shared phase.
void linear_seed(DoubletParams& q, std::span<const double> y, std::span<const double> x) {
  std::array<std::array<double, 6>, 6> m{};
  std::array<double, 6> rhs{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x1 = x[i] - q.p[2] + q.p[3] / 2.0;
    const double x2 = x[i] - q.p[2] - q.p[3] / 2.0;
    const std::array<double, 6> row{lorentz_derivative(x1, q.p[4]), lorentz_derivative(x2, q.p[4]),
                                    dispersion_derivative(x1, q.p[4]),
                                    dispersion_derivative(x2, q.p[4]), 1.0, x[i] - q.p[2]};
    for (int a = 0; a < 6; ++a) {
      rhs[a] += row[a] * y[i];
      for (int b = a; b < 6; ++b) m[a][b] += row[a] * row[b];
    }
  }
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < a; ++b) m[a][b] = m[b][a];
  std::array<double, 6> sol{};
  if (!solve_normal<6>(m, rhs, sol)) return;
  for (double v : sol)
    if (!std::isfinite(v)) return;
  const double phase = std::atan2(sol[2] + sol[3], sol[0] + sol[1]);
  const double cf = std::cos(phase), sf = std::sin(phase);
  q.p[0] = sol[0] * cf + sol[2] * sf;
  q.p[1] = sol[1] * cf + sol[3] * sf;
  q.p[5] = phase;
  q.p[6] = sol[4];
  q.p[7] = sol[5];
}

DoubletParams initial_guess(std::span<const double> signal, std::span<const double> grid) {
  const ExtremaReport extrema = find_extrema(signal, grid);
  require(extrema.zero_crossings.size() >= 2,
          "fit_doublet: no doublet signature (need >= 2 zero crossings or an explicit init)");
  const double z_first = extrema.zero_crossings.front().position_ghz;
  const double z_last = extrema.zero_crossings.back().position_ghz;
  DoubletParams q{};
  q.p[2] = 0.5 * (z_first + z_last);
  q.p[3] = std::max(z_last - z_first, (grid.back() - grid.front()) / 100.0);
  q.p[4] = std::max(0.5 * q.p[3], (grid.back() - grid.front()) / 200.0);
  linear_seed(q, signal, grid);
  return q;
}

}  // namespace

namespace {

struct GnOutcome {
  DoubletParams q{};
  double ssr = 0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0;
  std::vector<double> trace;
};

GnOutcome run_gauss_newton(DoubletParams q, std::span<const double> signal,
                           std::span<const double> grid_ghz) {
  constexpr int kMaxIter = 500;
  constexpr double kParamTol = 1e-8;
  constexpr double kGradTol = 1e-10;
  const double span = grid_ghz.back() - grid_ghz.front();
  const double mid = 0.5 * (grid_ghz.back() + grid_ghz.front());

  GnOutcome out;
  double ssr = sum_squared_residuals(q, signal, grid_ghz);
  out.trace.push_back(std::sqrt(ssr / signal.size()));

  int iter = 0;
  bool converged = false;
  double gradient_norm = 0;
  while (iter < kMaxIter) {
    ++iter;
    std::array<std::array<double, kNP>, kNP> jtj{};
    std::array<double, kNP> jtr{};
    for (std::size_t i = 0; i < signal.size(); ++i) {
      const double nu = grid_ghz[i];
      const double w = q.p[4], phase = q.p[5];
      const double x1 = nu - q.p[2] + q.p[3] / 2.0;
      const double x2 = nu - q.p[2] - q.p[3] / 2.0;
      const double d1 = component_dx(x1, w, phase);
      const double d2 = component_dx(x2, w, phase);
      std::array<double, kNP> row;
      row[0] = doublet_component(x1, w, phase);
      row[1] = doublet_component(x2, w, phase);
      row[2] = -(q.p[0] * d1 + q.p[1] * d2) - q.p[7];
      row[3] = 0.5 * (q.p[0] * d1 - q.p[1] * d2);
      row[4] = q.p[0] * component_dw(x1, w, phase) + q.p[1] * component_dw(x2, w, phase);
      row[5] = q.p[0] * component_dphase(x1, w, phase) + q.p[1] * component_dphase(x2, w, phase);
      row[6] = 1.0;
      row[7] = nu - q.p[2];
      const double r = q.model(nu) - signal[i];
      for (int a = 0; a < kNP; ++a) {
        jtr[a] += row[a] * r;
        for (int b = a; b < kNP; ++b) jtj[a][b] += row[a] * row[b];
      }
    }
    for (int a = 0; a < kNP; ++a)
      for (int b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];

    double grad_norm = 0;
    for (int a = 0; a < kNP; ++a) grad_norm = std::max(grad_norm, std::abs(2.0 * jtr[a]));
    gradient_norm = grad_norm;
    if (grad_norm < kGradTol) {
      converged = true;
      break;
    }

    std::array<double, kNP> step{};
    bool solved = false;
    for (int attempt = 0; attempt < 10 && !solved; ++attempt) {
      auto damped = jtj;
      if (attempt > 0) {
        double max_diag = 0;
        for (int a = 0; a < kNP; ++a) max_diag = std::max(max_diag, damped[a][a]);
        const double ridge = max_diag * std::pow(10.0, attempt - 13);
        for (int a = 0; a < kNP; ++a) damped[a][a] += ridge;
      }
      std::array<double, kNP> rhs = jtr;
      for (auto& v : rhs) v = -v;
      solved = solve_normal<kNP>(damped, rhs, step);
    }
    if (!solved) break;  // singular normal equations; report best iterate

    // Step halving until the residual improves; reject steps that push the
    // components far outside the fitted window (a runaway direction when
    // one amplitude dies).
    double alpha = 1.0;
    DoubletParams trial = q;
    double trial_ssr = ssr;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      for (int a = 0; a < kNP; ++a) trial.p[a] = q.p[a] + alpha * step[a];
      trial.p[4] = std::max(std::abs(trial.p[4]), 1e-12);
      const bool inside = std::abs(trial.p[3]) < 2.0 * span && std::abs(trial.p[2] - mid) < span;
      if (inside) {
        trial_ssr = sum_squared_residuals(trial, signal, grid_ghz);
        if (trial_ssr <= ssr) {
          improved = true;
          break;
        }
      }
      alpha /= 2.0;
    }
    if (!improved) {
      converged = grad_norm < std::max(kGradTol, 1e-12 * (1.0 + ssr));
      break;
    }

    double rel_change = 0;
    const double scale = std::abs(q.p[3]) + std::abs(q.p[4]) + 1e-12;
    for (int a = 0; a < kNP; ++a) {
      const double denom = std::max(std::abs(q.p[a]), scale);
      rel_change = std::max(rel_change, std::abs(alpha * step[a]) / denom);
    }
    q = trial;
    ssr = trial_ssr;
    out.trace.push_back(std::sqrt(ssr / signal.size()));
    if (rel_change < kParamTol) {
      converged = true;
      break;
    }
  }
  out.q = q;
  out.ssr = ssr;
  out.iterations = iter;
  out.converged = converged;
  out.gradient_norm = gradient_norm;
  return out;
}

// The A1 ~ -A2, s -> 0 configuration is a well-known trap: the pair mimics
// the profile derivative instead of a doublet.
bool anti_symmetric_collapse(const DoubletParams& q) {
  const double total = std::abs(q.p[0]) + std::abs(q.p[1]);
  if (total == 0) return false;
  return std::abs(q.p[0] + q.p[1]) < 0.05 * total && std::abs(q.p[3]) < 0.2 * std::abs(q.p[4]);
}

}  // namespace

DoubletFit fit_doublet(std::span<const double> signal, std::span<const double> grid_ghz,
                       std::optional<DoubletInit> init) {
  require(signal.size() == grid_ghz.size(), "fit_doublet: signal/grid size mismatch");
  require(signal.size() >= 10, "fit_doublet: not enough samples");

  DoubletParams q0{};
  if (init) {
    q0.p = {init->amp1,
            init->amp2,
            init->center_ghz,
            init->splitting_ghz,
            std::max(init->halfwidth_ghz, 1e-6),
            init->phase,
            0.0,
            0.0};
    if (init->amp1 == 0 && init->amp2 == 0) linear_seed(q0, signal, grid_ghz);
  } else {
    q0 = initial_guess(signal, grid_ghz);
  }

  GnOutcome best = run_gauss_newton(q0, signal, grid_ghz);

  // Deterministic second start when the first lands in the anti-symmetric
  // trap or stalls: retry with one amplitude muted.
  if (!best.converged || anti_symmetric_collapse(best.q)) {
    DoubletParams q1 = q0;
    const double dominant = std::abs(q0.p[0]) >= std::abs(q0.p[1]) ? q0.p[0] : q0.p[1];
    q1.p[0] = dominant;
    q1.p[1] = 0.0;
    GnOutcome retry = run_gauss_newton(q1, signal, grid_ghz);
    if (retry.ssr < best.ssr) best = retry;
  }

  DoubletParams q = best.q;
  // Canonical orientation: positive splitting, amp1 on the low-frequency
  // side, phase folded into [-pi/2, pi/2] (P(x; w, phase+pi) = -P(x; w, phase)).
  if (q.p[3] < 0) {
    q.p[3] = -q.p[3];
    std::swap(q.p[0], q.p[1]);
  }
  const double folded = std::remainder(q.p[5], kPi);
  const long half_turns = std::lround((q.p[5] - folded) / kPi);
  if (half_turns % 2 != 0) {
    q.p[0] = -q.p[0];
    q.p[1] = -q.p[1];
  }
  q.p[5] = folded;

  DoubletFit fit;
  fit.iterations = best.iterations;
  fit.converged = best.converged;
  fit.gradient_norm = best.gradient_norm;
  fit.residual_trace = std::move(best.trace);
  fit.amp1 = q.p[0];
  fit.amp2 = q.p[1];
  fit.center_ghz = q.p[2];
  fit.splitting_ghz = std::abs(q.p[3]);
  fit.width_ghz = 2.0 * std::abs(q.p[4]);
  fit.phase = q.p[5];
  fit.baseline = q.p[6];
  fit.baseline_slope = q.p[7];
  fit.residual_rms = std::sqrt(best.ssr / signal.size());
  return fit;
}

double asymmetry(const DoubletFit& fit) {
  require(fit.converged, "asymmetry: fit did not converge");
  const double a1 = std::abs(fit.amp1);
  const double a2 = std::abs(fit.amp2);
  if (a1 + a2 == 0) throw std::domain_error("asymmetry: both amplitudes vanish");
  return (a1 - a2) / (a1 + a2);
}

LinearFit fit_linear(std::span<const std::pair<double, double>> points, bool through_origin) {
  require(points.size() >= 2, "fit_linear: at least two points required");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  LinearFit fit;
  fit.through_origin = through_origin;
  fit.n_points = static_cast<int>(points.size());
  if (through_origin) {
    require(sxx > 0, "fit_linear: degenerate abscissae");
    fit.slope = sxy / sxx;
    fit.intercept = 0;
    double ssr = 0;
    for (const auto& [x, y] : points) {
      const double r = y - fit.slope * x;
      ssr += r * r;
    }
    fit.slope_stderr = std::sqrt(ssr / (n - 1.0) / sxx);
  } else {
    const double sxx_c = sxx - sx * sx / n;
    require(sxx_c > 0, "fit_linear: degenerate abscissae");
    fit.slope = (sxy - sx * sy / n) / sxx_c;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ssr = 0;
    for (const auto& [x, y] : points) {
      const double r = y - fit.slope * x - fit.intercept;
      ssr += r * r;
    }
    const double dof = std::max(n - 2.0, 1.0);
    fit.slope_stderr = std::sqrt(ssr / dof / sxx_c);
  }
  return fit;
}

}  // namespace srfm
