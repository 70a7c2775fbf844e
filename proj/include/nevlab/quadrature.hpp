#pragma once

#include <functional>
#include <vector>

namespace nevlab {

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;   // absolute error estimate
    long evals = 0;
    bool converged = true;

    IntegralResult& operator+=(const IntegralResult& o) {
        value += o.value;
        error += o.error;
        evals += o.evals;
        converged = converged && o.converged;
        return *this;
    }
};

using Fn1 = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod 7-15 on [a,b].  Splits the worst segment
/// until the summed error estimate meets max(abs_tol, rel_tol*|I|) or the
/// evaluation budget runs out.  `knots` forces initial subdivision points
/// (used for interior kinks and near-singular shells).
IntegralResult adapt_1d(const Fn1& f, double a, double b, double rel_tol,
                        double abs_tol = 0.0, long max_evals = 200000,
                        const std::vector<double>& knots = {});

/// Integral over [a, inf): maps the tail through t = a + s/(1-s).
IntegralResult adapt_semi_inf(const Fn1& f, double a, double rel_tol,
                              double abs_tol = 0.0, long max_evals = 200000);

/// Periodic trapezoid on [0, period) with node doubling until two successive
/// levels agree to rel_tol (spectrally accurate for smooth periodic f).
IntegralResult trapezoid_periodic(const Fn1& f, double period, double rel_tol,
                                  int n0 = 16, int n_max = 1 << 16);

/// Gauss-Legendre nodes and weights on [-1, 1]; cached per order.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Quadrature rule on the unit sphere S^{dim-1} (dim = ambient dimension >= 2):
/// nodes are unit vectors, weights sum to the sphere area.  Product rules:
/// exact trapezoid in periodic angles, Gauss-Legendre elsewhere.  `order`
/// scales the per-axis node counts.
struct SphereRule {
    std::vector<std::vector<double>> nodes;
    std::vector<double> weights;
};
SphereRule sphere_rule(int dim, int order);

/// Equal-weight quasi-uniform direction mesh on S^{dim-1} (Fibonacci spiral
/// for dim 3, equispaced for dim 2, additive low-discrepancy lattice above).
/// Used for boundary extraction meshes, not for integration.
std::vector<std::vector<double>> direction_grid(int dim, int count);

} // namespace nevlab
