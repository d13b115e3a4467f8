#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace srfm {

struct Extremum {
  double position_ghz = 0;
  double value = 0;
};

/// Interior extrema and zero crossings of a sampled signal, with sub-grid
/// refinement (3-point parabola for extrema, linear interpolation for
/// crossings). delta_mm is the separation between the principal (global)
/// maximum and minimum when both exist.
struct ExtremaReport {
  std::vector<Extremum> maxima;
  std::vector<Extremum> minima;
  std::vector<Extremum> zero_crossings;  // value is 0 by construction
  std::optional<Extremum> principal_max;
  std::optional<Extremum> principal_min;
  std::optional<double> delta_mm_ghz;
};

ExtremaReport find_extrema(std::span<const double> signal, std::span<const double> grid_ghz);

/// Line width from the max/min interval of a reflection spectrum.
double width_from_mm(double delta_mm_ghz);

/// Derivative-of-Lorentzian component profile, d/dx [w^2 / (x^2 + w^2)].
double lorentz_derivative(double x, double halfwidth);

/// Derivative of the matching dispersion shape, d/dx [x w / (x^2 + w^2)].
double dispersion_derivative(double x, double halfwidth);

/// Fit component profile: cos(phase) * lorentz_derivative +
/// sin(phase) * dispersion_derivative. Reflection FM components are
/// dispersion-mixed, so the fit carries one shared mixing phase; phase 0
/// recovers the plain derivative-of-Lorentzian doublet.
double doublet_component(double x, double halfwidth, double phase);

struct DoubletInit {
  double amp1 = 0;  // 0 = estimate amplitudes/phase/baseline linearly
  double amp2 = 0;
  double center_ghz = 0;
  double splitting_ghz = 0;
  double halfwidth_ghz = 0;
  double phase = 0;
};

struct DoubletFit {
  double splitting_ghz = 0;  // |s|
  double width_ghz = 0;      // full width, 2w
  double center_ghz = 0;
  double amp1 = 0;  // component at center - s/2
  double amp2 = 0;  // component at center + s/2
  double phase = 0;
  double baseline = 0;
  double baseline_slope = 0;
  double residual_rms = 0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0;
  std::vector<double> residual_trace;  // rms per accepted iteration
};

/// Least-squares fit of two mixed-profile components with common width and
/// shared phase on a linear baseline, by damped Gauss-Newton with analytic
/// Jacobian and step halving. Without an explicit init the start point is
/// derived from the zero crossings of the signal; a signal with fewer than
/// two crossings and no init is rejected.
DoubletFit fit_doublet(std::span<const double> signal, std::span<const double> grid_ghz,
                       std::optional<DoubletInit> init = std::nullopt);

/// (|A1| - |A2|) / (|A1| + |A2|) of a converged fit.
double asymmetry(const DoubletFit& fit);

struct LinearFit {
  double slope = 0;
  double intercept = 0;  // zero when fitted through the origin
  double slope_stderr = 0;
  bool through_origin = true;
  int n_points = 0;
};

LinearFit fit_linear(std::span<const std::pair<double, double>> points, bool through_origin);

}  // namespace srfm
