#pragma once

#include "nevlab/rng.hpp"

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace nevlab {

using Point = std::vector<double>;
using CMatrix = std::vector<std::vector<std::complex<double>>>;

/// Fitted (or exact) constants of the two-sided kernel/Green estimates:
///   c1/(2V(sqrt t)) exp(-rho^2/(4(1-eps)t)) <= p <= c2/(2V(sqrt t)) exp(-rho^2/(4(1+eps)t))
///   A int_rho^inf t dt/V(t) <= G <= B int_rho^inf t dt/V(t)
struct LiYauConstants {
    double epsilon = 0.1;
    double c1 = 0.0, c2 = 0.0;
    double A = 0.0, B = 0.0;
    bool exact = false; // true when the model admits exact constants
    double beta() const { return (1.0 + epsilon) / (1.0 - epsilon); }
    double theta() const { return 2.0 * (1.0 + epsilon) / (1.0 - epsilon); }
    bool valid() const {
        return epsilon >= 0.0 && epsilon < 1.0 && c1 > 0.0 && c1 <= c2;
    }
};

/// One homogeneous factor of a product model.  Every factor is two-point
/// homogeneous, so distance from the factor base determines all radial data.
struct Factor {
    enum Kind { Euclid, Circle, Sphere, Projective };
    Kind kind;
    int dim;      // real dimension
    double scale; // Circle: circumference; Sphere: radius; unused otherwise

    int coord_dim() const;   // slots used in the flat coordinate vector
    int tangent_dim() const; // direction components at the base point
    double diameter() const; // +inf for Euclid
    bool kernel_supported() const;

    double distance(const double* x, const double* y) const;
    void base(double* out) const;
    /// Geodesic from the base: point at distance s in unit direction u.
    void point_at(double s, const double* u, double* out) const;
    /// Area of the distance sphere {d(x, base) = s} and volume of the ball.
    double sphere_area(double s) const;
    double ball_volume(double s) const;
    double heat_kernel(double t, double dist) const;
    /// Draw from p(t, base, .) dv; advances ctr.
    void kernel_sample(double t, const CounterRng& rng, std::uint64_t stream,
                       std::uint64_t& ctr, double* out) const;
    /// Draw uniformly from the ball of radius R about the base; advances ctr.
    void ball_sample(double R, const CounterRng& rng, std::uint64_t stream,
                     std::uint64_t& ctr, double* out) const;
};

/// A product model manifold.  Coordinates are flat real vectors laid out
/// factor by factor; the chart per factor is documented in the README
/// (Euclidean: Cartesian; circles: fundamental domain [0, L); projective
/// factors: affine chart about the base; spheres: embedded unit vectors).
class ModelManifold {
  public:
    static ModelManifold euclidean(int m);      // C^m, flat
    static ModelManifold cylinder();            // C^*, |dz|^2/|z|^2 = R x S^1
    static ModelManifold punctured(int m);      // C^m \ {0}, ||dz||^2/||z||^2, m >= 2
    ModelManifold with_torus(const std::vector<double>& lengths) const;
    ModelManifold with_projective(int k) const;

    const std::string& id() const { return id_; }
    const std::vector<Factor>& factors() const { return factors_; }
    int real_dim() const { return real_dim_; }
    int complex_dim() const { return complex_dim_; } // 0 when no complex chart
    int coord_dim() const { return coord_dim_; }
    int tangent_dim() const { return tangent_dim_; }

    Point base_point() const;
    double distance(const Point& x, const Point& y) const;
    std::vector<double> factor_distances(const Point& x, const Point& y) const;
    double rho(const Point& x) const; // distance from the base point

    /// Volume of the geodesic ball about the base; closed form for a single
    /// factor, slicing quadrature (rel 1e-9) for products.
    double volume(double r) const;

    bool parabolic() const { return parabolic_; }
    bool kernel_supported() const;
    double heat_kernel(double t, const Point& x, const Point& y) const;
    /// 2 int_0^inf p(t,x,y) dt; closed form on C^m (m >= 2), quadrature otherwise.
    double green(const Point& x, const Point& y) const;
    double green_rho(double rho) const; // radial form about the base
    bool green_closed_form() const;

    /// Geodesic from the base: components move at speeds given by the blocks
    /// of the unit direction vector (dimension tangent_dim()).
    Point ray_point(const std::vector<double>& dir, double s) const;

    /// Ricci form at x: the Hermitian matrix psi with
    /// R = (sqrt(-1)/pi) sum psi_{i jbar} dz_i wedge dzbar_j in the model's
    /// complex chart.  Zero for flat models; Fubini-Study blocks otherwise.
    CMatrix ricci_form(const Point& x) const;
    bool flat() const;

    /// Draw from p(t, o, .) dv; deterministic in (rng, stream, ctr).
    Point kernel_sample(double t, const CounterRng& rng, std::uint64_t stream,
                        std::uint64_t& ctr) const;
    /// Uniform draw from the product of factor balls of radius R about the
    /// base (the region covering Delta(r) for R >= beta r); returns the point,
    /// the region's volume is sample_region_volume(R).
    Point ball_sample(double R, const CounterRng& rng, std::uint64_t stream,
                      std::uint64_t& ctr) const;
    double sample_region_volume(double R) const;

    /// Fit the two-sided kernel constants by grid scan (exact on C^m and for
    /// single flat factors where the kernel is the model kernel itself).
    LiYauConstants fit_heat_constants(double epsilon) const;
    /// Fill A, B by scanning G against int_rho^inf t dt / V(t) (exact 1/m on C^m).
    void fit_green_constants(LiYauConstants& c) const;
    double green_comparison_integral(double rho) const; // int_rho^inf t dt/V(t)

    /// Complex chart adapters (euclidean, cylinder, punctured only).
    bool has_complex_chart() const;
    Point from_complex(const std::vector<std::complex<double>>& z) const;
    std::vector<std::complex<double>> to_complex(const Point& x) const;

    std::string describe() const; // config-block style key=value lines

  private:
    enum class BaseKind { Euclidean, Cylinder, Punctured };

    ModelManifold() = default;
    void finalize();
    bool classify_parabolic() const;
    double volume_of(double r) const;
    double volume_slice(size_t i, double r) const;

    std::string id_;
    std::vector<Factor> factors_;
    BaseKind base_kind_ = BaseKind::Euclidean;
    size_t base_factor_count_ = 1;
    int base_complex_dim_ = 0;
    int n_torus_ = 0;
    int n_proj_ = 0;
    int real_dim_ = 0;
    int complex_dim_ = 0;
    int coord_dim_ = 0;
    int tangent_dim_ = 0;
    bool parabolic_ = false;
};

} // namespace nevlab
