#pragma once

#include <cstdint>
#include <vector>

namespace nevlab {

/// Exponential integral E1(x) = \int_x^inf e^{-s}/s ds, x > 0.
double expint_e1(double x);

/// Upper incomplete gamma Gamma(s, x) for integer s >= 1:
/// (s-1)! e^{-x} sum_{k<s} x^k / k!.
double upper_gamma_int(int s, double x);

/// Surface area of the unit sphere S^{n-1} in R^n.
double unit_sphere_area(int n);

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// Heat kernel on a circle of circumference L for the generator Delta
/// (transition density of Brownian motion run at speed 2, so the line factor
/// is (4 pi t)^{-1/2} e^{-d^2/4t}).  d is the wrapped distance, 0 <= d <= L/2.
/// Image sum for small t, Fourier sum for t > L^2/(4 pi); truncation keeps the
/// dropped tail below 1e-12 relative.
double circle_heat_kernel(double t, double d, double L);

/// Heat kernel on the Fubini-Study line (round 2-sphere of radius 1/2, total
/// area pi), geodesic distance delta in [0, pi/2].  Spectral sum
/// (1/pi) sum_l (2l+1) e^{-4 l(l+1) t} P_l(cos 2 delta).
double fs_line_heat_kernel(double t, double delta);

/// Sum with pairwise splitting; deterministic and accurate for long vectors.
double pairwise_sum(const std::vector<double>& v);

} // namespace nevlab
