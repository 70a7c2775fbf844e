#include "nevlab/special.hpp"

#include <cmath>
#include <stdexcept>

namespace nevlab {

double expint_e1(double x) {
    if (!(x > 0))
        throw std::domain_error("expint_e1: argument must be positive");
    if (x > 700.0) return 0.0;  // below double underflow for e^{-x}/x
    return -std::expint(-x);
}

double upper_gamma_int(int s, double x) {
    if (s < 1) throw std::domain_error("upper_gamma_int: order must be >= 1");
    if (x < 0) throw std::domain_error("upper_gamma_int: argument must be >= 0");
    // Gamma(s,x) = (s-1)! e^{-x} sum_{k=0}^{s-1} x^k/k!, exact for integer s.
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < s; ++k) {
        term *= x / k;
        sum += term;
    }
    double fact = 1.0;
    for (int k = 2; k < s; ++k) fact *= k;
    return fact * std::exp(-x) * sum;
}

double unit_sphere_area(int n) {
    if (n < 1) throw std::domain_error("unit_sphere_area: dimension must be >= 1");
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

double unit_ball_volume(int n) {
    if (n < 1) throw std::domain_error("unit_ball_volume: dimension must be >= 1");
    return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double circle_heat_kernel(double t, double d, double L) {
    if (!(t > 0) || !(L > 0))
        throw std::domain_error("circle_heat_kernel: t and L must be positive");
    if (d < 0 || d > 0.5 * L + 1e-12 * L)
        throw std::domain_error("circle_heat_kernel: distance outside [0, L/2]");
    if (t > L * L / (4.0 * M_PI)) {
        // Fourier side: (1/L)(1 + 2 sum_n e^{-4 pi^2 n^2 t / L^2} cos(2 pi n d / L)).
        double q = 4.0 * M_PI * M_PI * t / (L * L);
        double sum = 1.0;
        for (int n = 1;; ++n) {
            double term = 2.0 * std::exp(-q * n * n);
            if (term < 1e-15) break;
            sum += term * std::cos(2.0 * M_PI * n * d / L);
        }
        return sum / L;
    }
    // Image sum: the k=0 term dominates; |d + kL| >= (|k|-1/2) L.
    double pref = 1.0 / std::sqrt(4.0 * M_PI * t);
    double sum = std::exp(-d * d / (4.0 * t));
    for (int k = 1; k < 10000; ++k) {
        double a = d + k * L, b = d - k * L;
        double term = std::exp(-a * a / (4.0 * t)) + std::exp(-b * b / (4.0 * t));
        sum += term;
        // <= so full underflow (term == sum == 0) also terminates
        if (k >= 2 && term <= 1e-15 * sum) break;
    }
    return pref * sum;
}

double fs_line_heat_kernel(double t, double delta) {
    if (!(t > 0))
        throw std::domain_error("fs_line_heat_kernel: t must be positive");
    if (delta < -1e-12 || delta > 0.5 * M_PI + 1e-12)
        throw std::domain_error("fs_line_heat_kernel: distance outside [0, pi/2]");
    double c = std::cos(2.0 * std::min(std::max(delta, 0.0), 0.5 * M_PI));
    // Legendre recurrence; eigenvalue of degree l is 4 l(l+1) at radius 1/2.
    double p_prev = 1.0, p_cur = c;
    double sum = 1.0;  // l = 0 term
    if (std::exp(-8.0 * t) > 0) sum += 3.0 * std::exp(-8.0 * t) * c;
    for (int l = 2; l < 4000; ++l) {
        double p_next = ((2 * l - 1) * c * p_cur - (l - 1) * p_prev) / l;
        p_prev = p_cur;
        p_cur = p_next;
        double w = (2 * l + 1) * std::exp(-4.0 * l * (l + 1) * t);
        sum += w * p_cur;
        if (w < 1e-16 && l > 4) break;
    }
    return sum / M_PI;
}

double pairwise_sum(const std::vector<double>& v) {
    // Recursive halving keeps rounding error O(log n) and is order-stable.
    struct Rec {
        static double run(const double* p, size_t n) {
            if (n <= 8) {
                double s = 0.0;
                for (size_t i = 0; i < n; ++i) s += p[i];
                return s;
            }
            size_t h = n / 2;
            return run(p, h) + run(p + h, n - h);
        }
    };
    return v.empty() ? 0.0 : Rec::run(v.data(), v.size());
}

} // namespace nevlab
