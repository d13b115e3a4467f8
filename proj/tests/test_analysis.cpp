#include "srfm/analysis.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using namespace srfm;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

std::vector<double> doublet_signal(const std::vector<double>& grid, double a1, double a2, double c,
                                   double s, double w) {
  std::vector<double> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    y[i] = a1 * lorentz_derivative(grid[i] - c + s / 2, w) +
           a2 * lorentz_derivative(grid[i] - c - s / 2, w);
  return y;
}

}  // namespace

TEST_CASE("extrema of a Lorentzian derivative sit at +-w/sqrt(3)") {
  const double w = 5.0;
  const auto grid = linspace(-60, 60, 2401);
  std::vector<double> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) y[i] = lorentz_derivative(grid[i], w);
  const ExtremaReport report = find_extrema(y, grid);
  REQUIRE(report.delta_mm_ghz.has_value());
  const double expected = 2.0 * w / std::sqrt(3.0);
  CHECK(*report.delta_mm_ghz == doctest::Approx(expected).epsilon(0.01));
  // One zero crossing at the center.
  REQUIRE(report.zero_crossings.size() == 1);
  CHECK(report.zero_crossings.front().position_ghz == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("monotonic signal yields an empty extrema report") {
  const auto grid = linspace(0, 10, 64);
  std::vector<double> ramp(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) ramp[i] = 0.3 * grid[i] - 1.0;
  const ExtremaReport report = find_extrema(ramp, grid);
  CHECK(report.maxima.empty());
  CHECK(report.minima.empty());
  CHECK(!report.delta_mm_ghz.has_value());
}

TEST_CASE("parabolic refinement beats the grid step") {
  // Coarse grid, off-grid peak position.
  const double w = 4.0;
  const double center = 0.37;
  const auto grid = linspace(-30, 30, 121);  // 0.5 GHz step
  std::vector<double> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i] - center;
    y[i] = w * w / (x * x + w * w);
  }
  const ExtremaReport report = find_extrema(y, grid);
  REQUIRE(report.principal_max.has_value());
  CHECK(std::abs(report.principal_max->position_ghz - center) < 0.05);
}

TEST_CASE("width from the max/min interval") {
  CHECK(width_from_mm(35.6) == doctest::Approx(30.972).epsilon(1e-12));
  CHECK(width_from_mm(35.6) == doctest::Approx(31.0).epsilon(2e-3));
  CHECK(width_from_mm(12.6) == doctest::Approx(10.962).epsilon(1e-12));
  CHECK(width_from_mm(12.6) == doctest::Approx(11.0).epsilon(4e-3));
  CHECK(width_from_mm(2 * 35.6) == doctest::Approx(2 * width_from_mm(35.6)));
  CHECK_THROWS_AS(width_from_mm(0.0), std::invalid_argument);
}

TEST_CASE("doublet fit: noiseless round trip recovers the generator") {
  const auto grid = linspace(-40, 40, 1600);
  const double s = 7.6, w = 4.25;
  const auto y = doublet_signal(grid, 3.0e-3, 3.0e-3, 0.0, s, w);
  const DoubletFit fit = fit_doublet(y, grid);
  CHECK(fit.converged);
  CHECK(fit.iterations < 100);
  CHECK(fit.splitting_ghz == doctest::Approx(7.6).epsilon(1e-6));
  CHECK(fit.width_ghz == doctest::Approx(8.5).epsilon(1e-6));
  CHECK(fit.center_ghz == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(fit.gradient_norm < 1e-10);
  CHECK(fit.residual_rms < 1e-12);
}

TEST_CASE("doublet fit: property round trip over well-separated generators") {
  std::mt19937 rng(20260808);
  std::uniform_real_distribution<double> splitting(6.0, 20.0);
  std::uniform_real_distribution<double> width_frac(0.3, 0.5);
  std::uniform_real_distribution<double> amp(1.0, 2.0);
  std::uniform_real_distribution<double> center(-5.0, 5.0);
  const auto grid = linspace(-80, 80, 2000);
  for (int trial = 0; trial < 25; ++trial) {
    const double s = splitting(rng);
    const double w = s * width_frac(rng);  // components separated: s > w
    const double c = center(rng);
    const double a1 = amp(rng);
    const double a2 = amp(rng);
    const auto y = doublet_signal(grid, a1, a2, c, s, w);
    const DoubletFit fit = fit_doublet(y, grid);
    REQUIRE(fit.converged);
    CHECK(fit.splitting_ghz == doctest::Approx(s).epsilon(1e-6));
    CHECK(fit.width_ghz == doctest::Approx(2 * w).epsilon(1e-6));
    CHECK(fit.amp1 == doctest::Approx(a1).epsilon(1e-5));
    CHECK(fit.amp2 == doctest::Approx(a2).epsilon(1e-5));
  }
}

TEST_CASE("doublet fit: recovers dispersion-mixed components on a baseline") {
  const auto grid = linspace(-60, 60, 1800);
  const double s = 11.0, w = 5.5, phase = -1.2, b0 = 3e-4, b1 = 2e-5;
  std::vector<double> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    y[i] = 2.0e-3 * doublet_component(grid[i] + s / 2, w, phase) +
           1.4e-3 * doublet_component(grid[i] - s / 2, w, phase) + b0 + b1 * grid[i];
  }
  DoubletInit init;
  init.center_ghz = 1.0;
  init.splitting_ghz = 9.0;
  init.halfwidth_ghz = 4.0;
  const DoubletFit fit = fit_doublet(y, grid, init);
  REQUIRE(fit.converged);
  CHECK(fit.splitting_ghz == doctest::Approx(s).epsilon(1e-6));
  CHECK(fit.width_ghz == doctest::Approx(2 * w).epsilon(1e-6));
  CHECK(fit.phase == doctest::Approx(phase).epsilon(1e-5));
  CHECK(fit.amp1 == doctest::Approx(2.0e-3).epsilon(1e-5));
  CHECK(fit.amp2 == doctest::Approx(1.4e-3).epsilon(1e-5));
  CHECK(fit.baseline == doctest::Approx(b0).epsilon(1e-4));
}

TEST_CASE("doublet fit: single component degenerates gracefully") {
  const auto grid = linspace(-40, 40, 1200);
  const auto y = doublet_signal(grid, 2.0, 0.0, 0.0, 0.0, 5.0);  // one line at 0
  DoubletInit init;
  init.center_ghz = 0.0;
  init.splitting_ghz = 6.0;
  init.halfwidth_ghz = 4.0;
  const DoubletFit fit = fit_doublet(y, grid, init);
  // Either the splitting collapses or one amplitude dies out.
  const bool collapsed = fit.splitting_ghz < 0.5;
  const bool one_sided =
      std::min(std::abs(fit.amp1), std::abs(fit.amp2)) <
      1e-3 * std::max(std::abs(fit.amp1), std::abs(fit.amp2));
  CHECK((collapsed || one_sided));
  CHECK(fit.residual_rms < 1e-6);
}

TEST_CASE("doublet fit: flat signal is rejected without an init") {
  const auto grid = linspace(-10, 10, 100);
  const std::vector<double> flat(grid.size(), 0.125);
  CHECK_THROWS_AS(fit_doublet(flat, grid), std::invalid_argument);
}

TEST_CASE("asymmetry of a fit") {
  DoubletFit fit;
  fit.converged = true;
  fit.amp1 = 2.0;
  fit.amp2 = 2.0;
  CHECK(asymmetry(fit) == doctest::Approx(0.0));
  fit.amp2 = 1.0;
  CHECK(asymmetry(fit) == doctest::Approx(1.0 / 3.0));
  fit.amp1 = -1.0;
  fit.amp2 = -3.0;
  CHECK(asymmetry(fit) == doctest::Approx(-0.5));
  fit.amp1 = 0.0;
  fit.amp2 = 0.0;
  CHECK_THROWS_AS(asymmetry(fit), std::domain_error);
  fit.converged = false;
  CHECK_THROWS_AS(asymmetry(fit), std::invalid_argument);
}

TEST_CASE("linear fit") {
  std::vector<std::pair<double, double>> pts;
  for (int i = 1; i <= 6; ++i) pts.emplace_back(i, i);
  LinearFit fit = fit_linear(pts, true);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.slope_stderr == doctest::Approx(0.0));

  for (auto& [x, y] : pts) y *= 2.0;
  fit = fit_linear(pts, true);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));

  // Free-intercept mode recovers an offset line.
  std::vector<std::pair<double, double>> offset;
  for (int i = 0; i <= 5; ++i) offset.emplace_back(i, 0.5 * i + 3.0);
  fit = fit_linear(offset, false);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));

  const std::vector<std::pair<double, double>> single{{1.0, 1.0}};
  CHECK_THROWS_AS(fit_linear(single, true), std::invalid_argument);
  const std::vector<std::pair<double, double>> degenerate{{0.0, 1.0}, {0.0, 2.0}};
  CHECK_THROWS_AS(fit_linear(degenerate, true), std::invalid_argument);
}
