#include "nevlab/geometry.hpp"

#include "nevlab/quadrature.hpp"
#include "nevlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nevlab {

namespace {

double wrap(double th, double L) {
    double w = std::fmod(th, L);
    return w < 0.0 ? w + L : w;
}

double clamp1(double x) { return std::max(-1.0, std::min(1.0, x)); }

// int_0^x sin^n, by the standard downward recurrence; exact, no quadrature.
double sin_power_integral(int n, double x) {
    if (n == 0) return x;
    if (n == 1) return 1.0 - std::cos(x);
    double i0 = x, i1 = 1.0 - std::cos(x);
    double cur = (n % 2 == 0) ? i0 : i1;
    for (int k = (n % 2 == 0) ? 2 : 3; k <= n; k += 2) {
        cur = -std::cos(x) * std::pow(std::sin(x), k - 1) / k + (k - 1.0) / k * cur;
    }
    return cur;
}

std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> out(n);
    double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) out[i] = std::exp(la + (lb - la) * i / (n - 1.0));
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Factor

int Factor::coord_dim() const {
    switch (kind) {
        case Euclid: return dim;
        case Circle: return 1;
        case Sphere: return dim + 1; // embedded unit vector
        case Projective: return dim; // affine chart, dim = 2k reals
    }
    return 0;
}

int Factor::tangent_dim() const { return kind == Circle ? 1 : dim; }

double Factor::diameter() const {
    switch (kind) {
        case Euclid: return std::numeric_limits<double>::infinity();
        case Circle: return scale / 2.0;
        case Sphere: return M_PI * scale;
        case Projective: return M_PI / 2.0;
    }
    return 0.0;
}

bool Factor::kernel_supported() const {
    switch (kind) {
        case Euclid:
        case Circle: return true;
        case Sphere: return false;
        case Projective: return dim == 2;
    }
    return false;
}

double Factor::distance(const double* x, const double* y) const {
    switch (kind) {
        case Euclid: {
            double s = 0.0;
            for (int i = 0; i < dim; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
            return std::sqrt(s);
        }
        case Circle: {
            double m = std::fmod(std::abs(x[0] - y[0]), scale);
            return std::min(m, scale - m);
        }
        case Sphere: {
            double dot = 0.0;
            for (int i = 0; i <= dim; ++i) dot += x[i] * y[i];
            return scale * std::acos(clamp1(dot));
        }
        case Projective: {
            // Homogeneous lifts (w, 1); distance arccos |<wh, vh>| / (|wh||vh|).
            int k = dim / 2;
            double re = 1.0, im = 0.0, nx = 1.0, ny = 1.0;
            for (int j = 0; j < k; ++j) {
                double ar = x[2 * j], ai = x[2 * j + 1];
                double br = y[2 * j], bi = y[2 * j + 1];
                re += ar * br + ai * bi;
                im += ai * br - ar * bi;
                nx += ar * ar + ai * ai;
                ny += br * br + bi * bi;
            }
            double c = std::sqrt(re * re + im * im) / std::sqrt(nx * ny);
            return std::acos(clamp1(c));
        }
    }
    return 0.0;
}

void Factor::base(double* out) const {
    int n = coord_dim();
    for (int i = 0; i < n; ++i) out[i] = 0.0;
    if (kind == Sphere) out[0] = 1.0;
}

void Factor::point_at(double s, const double* u, double* out) const {
    switch (kind) {
        case Euclid:
            for (int i = 0; i < dim; ++i) out[i] = s * u[i];
            return;
        case Circle:
            out[0] = wrap(s * u[0], scale);
            return;
        case Sphere: {
            double phi = s / scale;
            out[0] = std::cos(phi);
            for (int i = 0; i < dim; ++i) out[i + 1] = std::sin(phi) * u[i];
            return;
        }
        case Projective: {
            double sp = s;
            if (std::abs(std::cos(sp)) < 1e-12) sp -= 1e-9;
            double tn = std::tan(sp);
            for (int i = 0; i < dim; ++i) out[i] = tn * u[i];
            return;
        }
    }
}

double Factor::sphere_area(double s) const {
    if (s <= 0.0 || s >= diameter()) return 0.0;
    switch (kind) {
        case Euclid: return unit_sphere_area(dim) * std::pow(s, dim - 1);
        case Circle: return 2.0;
        case Sphere:
            return unit_sphere_area(dim) * std::pow(scale * std::sin(s / scale), dim - 1);
        case Projective: {
            int k = dim / 2;
            double a = 2.0 * std::pow(M_PI, k);
            for (int j = 1; j < k; ++j) a /= j; // 2 pi^k / (k-1)!
            return a * std::pow(std::sin(s), 2 * k - 1) * std::cos(s);
        }
    }
    return 0.0;
}

double Factor::ball_volume(double s) const {
    if (s <= 0.0) return 0.0;
    switch (kind) {
        case Euclid: return unit_ball_volume(dim) * std::pow(s, dim);
        case Circle: return std::min(2.0 * s, scale);
        case Sphere: {
            double phi = std::min(s / scale, M_PI);
            return unit_sphere_area(dim) * std::pow(scale, dim) *
                   sin_power_integral(dim - 1, phi);
        }
        case Projective: {
            int k = dim / 2;
            double v = std::pow(M_PI, k);
            for (int j = 1; j <= k; ++j) v /= j; // pi^k / k!
            double se = std::sin(std::min(s, M_PI / 2.0));
            return v * std::pow(se, 2 * k);
        }
    }
    return 0.0;
}

double Factor::heat_kernel(double t, double dist) const {
    switch (kind) {
        case Euclid: {
            double e = dist * dist / (4.0 * t);
            if (e > 745.0) return 0.0;
            return std::exp(-e) / std::pow(4.0 * M_PI * t, dim / 2.0);
        }
        case Circle: return circle_heat_kernel(t, dist, scale);
        case Projective:
            if (dim == 2) return fs_line_heat_kernel(t, dist);
            throw std::domain_error("heat kernel unavailable on this projective factor");
        case Sphere: throw std::domain_error("heat kernel unavailable on sphere factors");
    }
    return 0.0;
}

void Factor::kernel_sample(double t, const CounterRng& rng, std::uint64_t stream,
                           std::uint64_t& ctr, double* out) const {
    switch (kind) {
        case Euclid:
            for (int i = 0; i < dim; ++i)
                out[i] = rng.normal(stream, ctr++) * std::sqrt(2.0 * t);
            return;
        case Circle:
            out[0] = wrap(rng.normal(stream, ctr++) * std::sqrt(2.0 * t), scale);
            return;
        case Projective: {
            if (dim != 2)
                throw std::domain_error("kernel sampling unavailable on this projective factor");
            // Rejection in the radial variable against a flat envelope; the
            // azimuth is exactly uniform by symmetry.
            double sup = 0.0;
            for (int i = 0; i <= 512; ++i) {
                double del = 0.5 * M_PI * i / 512.0;
                sup = std::max(sup, fs_line_heat_kernel(t, del) * M_PI * std::sin(2.0 * del));
            }
            double m = 1.35 * sup;
            double del = 0.0;
            for (;;) {
                double u1 = rng.uniform(stream, ctr++);
                double u2 = rng.uniform(stream, ctr++);
                del = 0.5 * M_PI * u1;
                double g = fs_line_heat_kernel(t, del) * M_PI * std::sin(2.0 * del);
                if (u2 * m <= g) break;
            }
            double phi = 2.0 * M_PI * rng.uniform(stream, ctr++);
            double tn = std::tan(std::min(del, M_PI / 2.0 - 1e-12));
            out[0] = tn * std::cos(phi);
            out[1] = tn * std::sin(phi);
            return;
        }
        case Sphere: throw std::domain_error("kernel sampling unavailable on sphere factors");
    }
}

void Factor::ball_sample(double R, const CounterRng& rng, std::uint64_t stream,
                         std::uint64_t& ctr, double* out) const {
    switch (kind) {
        case Euclid: {
            std::vector<double> g(dim);
            double n2 = 0.0;
            do {
                n2 = 0.0;
                for (int i = 0; i < dim; ++i) {
                    g[i] = rng.normal(stream, ctr++);
                    n2 += g[i] * g[i];
                }
            } while (n2 < 1e-280);
            double rad = R * std::pow(rng.uniform(stream, ctr++), 1.0 / dim);
            for (int i = 0; i < dim; ++i) out[i] = rad * g[i] / std::sqrt(n2);
            return;
        }
        case Circle: {
            double c = std::min(R, scale / 2.0);
            out[0] = wrap((2.0 * rng.uniform(stream, ctr++) - 1.0) * c, scale);
            return;
        }
        case Sphere: {
            double cap = std::min(R, diameter());
            double target = rng.uniform(stream, ctr++) * ball_volume(cap);
            double lo = 0.0, hi = cap;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                (ball_volume(mid) < target ? lo : hi) = mid;
            }
            double s = 0.5 * (lo + hi);
            std::vector<double> g(dim);
            double n2 = 0.0;
            do {
                n2 = 0.0;
                for (int i = 0; i < dim; ++i) {
                    g[i] = rng.normal(stream, ctr++);
                    n2 += g[i] * g[i];
                }
            } while (n2 < 1e-280);
            for (int i = 0; i < dim; ++i) g[i] /= std::sqrt(n2);
            point_at(s, g.data(), out);
            return;
        }
        case Projective: {
            int k = dim / 2;
            if (R >= M_PI / 2.0 * (1.0 - 1e-12)) {
                // Uniform on the whole space: projectivized complex Gaussian.
                for (;;) {
                    std::vector<double> z(2 * (k + 1));
                    double n2 = 0.0;
                    for (int i = 0; i < 2 * (k + 1); ++i) {
                        z[i] = rng.normal(stream, ctr++);
                        n2 += z[i] * z[i];
                    }
                    double d0 = std::hypot(z[0], z[1]);
                    if (d0 < 1e-8 * std::sqrt(n2)) continue;
                    // w_j = z_j / z_0 in the affine chart.
                    for (int j = 1; j <= k; ++j) {
                        double ar = z[2 * j], ai = z[2 * j + 1];
                        double br = z[0], bi = z[1];
                        double den = br * br + bi * bi;
                        out[2 * (j - 1)] = (ar * br + ai * bi) / den;
                        out[2 * (j - 1) + 1] = (ai * br - ar * bi) / den;
                    }
                    return;
                }
            }
            double s = std::asin(std::sin(R) *
                                 std::pow(rng.uniform(stream, ctr++), 1.0 / (2.0 * k)));
            std::vector<double> g(dim);
            double n2 = 0.0;
            do {
                n2 = 0.0;
                for (int i = 0; i < dim; ++i) {
                    g[i] = rng.normal(stream, ctr++);
                    n2 += g[i] * g[i];
                }
            } while (n2 < 1e-280);
            for (int i = 0; i < dim; ++i) g[i] /= std::sqrt(n2);
            point_at(s, g.data(), out);
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// ModelManifold: construction

ModelManifold ModelManifold::euclidean(int m) {
    if (m < 1) throw std::invalid_argument("euclidean: m must be >= 1");
    ModelManifold mm;
    mm.id_ = "euclidean(" + std::to_string(m) + ")";
    mm.factors_.push_back(Factor{Factor::Euclid, 2 * m, 0.0});
    mm.base_kind_ = BaseKind::Euclidean;
    mm.base_factor_count_ = 1;
    mm.base_complex_dim_ = m;
    mm.finalize();
    return mm;
}

ModelManifold ModelManifold::cylinder() {
    ModelManifold mm;
    mm.id_ = "cylinder";
    mm.factors_.push_back(Factor{Factor::Euclid, 1, 0.0});
    mm.factors_.push_back(Factor{Factor::Circle, 1, 2.0 * M_PI});
    mm.base_kind_ = BaseKind::Cylinder;
    mm.base_factor_count_ = 2;
    mm.base_complex_dim_ = 1;
    mm.finalize();
    return mm;
}

ModelManifold ModelManifold::punctured(int m) {
    if (m < 2) throw std::invalid_argument("punctured: m must be >= 2");
    ModelManifold mm;
    mm.id_ = "punctured(" + std::to_string(m) + ")";
    mm.factors_.push_back(Factor{Factor::Euclid, 1, 0.0});
    mm.factors_.push_back(Factor{Factor::Sphere, 2 * m - 1, 1.0});
    mm.base_kind_ = BaseKind::Punctured;
    mm.base_factor_count_ = 2;
    mm.base_complex_dim_ = m;
    mm.finalize();
    return mm;
}

ModelManifold ModelManifold::with_torus(const std::vector<double>& lengths) const {
    ModelManifold mm = *this;
    std::ostringstream tag;
    tag << " x torus(";
    for (size_t i = 0; i < lengths.size(); ++i) {
        if (lengths[i] <= 0.0 || !std::isfinite(lengths[i]))
            throw std::invalid_argument("with_torus: lengths must be positive");
        mm.factors_.push_back(Factor{Factor::Circle, 1, lengths[i]});
        ++mm.n_torus_;
        tag << (i ? "," : "") << lengths[i];
    }
    tag << ")";
    if (!lengths.empty()) mm.id_ += tag.str();
    mm.finalize();
    return mm;
}

ModelManifold ModelManifold::with_projective(int k) const {
    if (k < 1) throw std::invalid_argument("with_projective: k must be >= 1");
    ModelManifold mm = *this;
    mm.factors_.push_back(Factor{Factor::Projective, 2 * k, 0.0});
    ++mm.n_proj_;
    mm.id_ += " x projective(" + std::to_string(k) + ")";
    mm.finalize();
    return mm;
}

void ModelManifold::finalize() {
    real_dim_ = coord_dim_ = tangent_dim_ = 0;
    complex_dim_ = base_complex_dim_;
    for (const Factor& f : factors_) {
        real_dim_ += f.dim;
        coord_dim_ += f.coord_dim();
        tangent_dim_ += f.tangent_dim();
        if (f.kind == Factor::Projective) complex_dim_ += f.dim / 2;
    }
    parabolic_ = classify_parabolic();
}

bool ModelManifold::classify_parabolic() const {
    if (factors_.size() == 1 && factors_[0].kind == Factor::Euclid)
        return factors_[0].dim <= 2;
    // Volume criterion: int^inf t dt / V(t) diverges iff the doubling
    // increments stop shrinking geometrically.
    double prev = 0.0, ratio = 0.0;
    for (int k = 0; k <= 11; ++k) {
        double a = std::pow(2.0, k), b = 2.0 * a;
        IntegralResult ik =
            adapt_1d([&](double t) { return t / volume_of(t); }, a, b, 1e-7, 0.0, 20000);
        if (k >= 9) ratio = std::max(ratio, ik.value / prev);
        prev = ik.value;
    }
    return ratio >= 0.95;
}

// ---------------------------------------------------------------------------
// ModelManifold: metric basics

Point ModelManifold::base_point() const {
    Point out(coord_dim_, 0.0);
    int off = 0;
    for (const Factor& f : factors_) {
        f.base(out.data() + off);
        off += f.coord_dim();
    }
    return out;
}

std::vector<double> ModelManifold::factor_distances(const Point& x, const Point& y) const {
    if ((int)x.size() != coord_dim_ || (int)y.size() != coord_dim_)
        throw std::invalid_argument("point has wrong coordinate dimension");
    std::vector<double> out;
    out.reserve(factors_.size());
    int off = 0;
    for (const Factor& f : factors_) {
        out.push_back(f.distance(x.data() + off, y.data() + off));
        off += f.coord_dim();
    }
    return out;
}

double ModelManifold::distance(const Point& x, const Point& y) const {
    double s = 0.0;
    for (double d : factor_distances(x, y)) s += d * d;
    return std::sqrt(s);
}

double ModelManifold::rho(const Point& x) const { return distance(base_point(), x); }

Point ModelManifold::ray_point(const std::vector<double>& dir, double s) const {
    if ((int)dir.size() != tangent_dim_)
        throw std::invalid_argument("direction has wrong tangent dimension");
    Point out(coord_dim_, 0.0);
    int toff = 0, coff = 0;
    for (const Factor& f : factors_) {
        int td = f.tangent_dim();
        double n2 = 0.0;
        for (int i = 0; i < td; ++i) n2 += dir[toff + i] * dir[toff + i];
        double nf = std::sqrt(n2);
        if (nf < 1e-300) {
            f.base(out.data() + coff);
        } else {
            std::vector<double> u(td);
            for (int i = 0; i < td; ++i) u[i] = dir[toff + i] / nf;
            f.point_at(s * nf, u.data(), out.data() + coff);
        }
        toff += td;
        coff += f.coord_dim();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Volume

double ModelManifold::volume_of(double r) const {
    if (r <= 0.0) return 0.0;
    return volume_slice(0, r);
}

double ModelManifold::volume(double r) const { return volume_of(r); }

double ModelManifold::volume_slice(size_t i, double r) const {
    if (r <= 0.0) return 0.0;
    if (i + 1 == factors_.size()) return factors_[i].ball_volume(r);
    const Factor& f = factors_[i];
    double cap = std::min(r, f.diameter());
    // Kinks of the remaining-volume profile: factor diameters crossed as the
    // residual radius sqrt(r^2 - s^2) shrinks.
    std::vector<double> knots;
    for (size_t j = i + 1; j < factors_.size(); ++j) {
        double dj = factors_[j].diameter();
        if (std::isfinite(dj) && dj < r) {
            double s = std::sqrt(std::max(0.0, r * r - dj * dj));
            if (s > 0.0 && s < cap) knots.push_back(s);
        }
    }
    IntegralResult res = adapt_1d(
        [&](double s) {
            double rest = std::sqrt(std::max(0.0, r * r - s * s));
            return f.sphere_area(s) * volume_slice(i + 1, rest);
        },
        0.0, cap, 1e-11, 0.0, 300000, knots);
    return res.value;
}

// ---------------------------------------------------------------------------
// Heat kernel and green function

bool ModelManifold::kernel_supported() const {
    for (const Factor& f : factors_)
        if (!f.kernel_supported()) return false;
    return true;
}

double ModelManifold::heat_kernel(double t, const Point& x, const Point& y) const {
    if (t <= 0.0) throw std::invalid_argument("heat kernel requires t > 0");
    double p = 1.0;
    std::vector<double> ds = factor_distances(x, y);
    for (size_t i = 0; i < factors_.size(); ++i) p *= factors_[i].heat_kernel(t, ds[i]);
    return p;
}

bool ModelManifold::green_closed_form() const {
    return factors_.size() == 1 && factors_[0].kind == Factor::Euclid &&
           factors_[0].dim >= 3;
}

double ModelManifold::green(const Point& x, const Point& y) const {
    if (parabolic_)
        throw std::domain_error("green function requires a non-parabolic model");
    double d = distance(x, y);
    if (green_closed_form()) {
        int n = factors_[0].dim;
        return std::tgamma(n / 2.0 - 1.0) / (2.0 * std::pow(M_PI, n / 2.0)) *
               std::pow(d, 2.0 - n);
    }
    if (!kernel_supported())
        throw std::domain_error("green function needs a computable heat kernel here");
    if (d < 1e-12) return std::numeric_limits<double>::infinity();
    std::vector<double> ds = factor_distances(x, y);
    auto p = [&](double t) {
        double v = 1.0;
        for (size_t i = 0; i < factors_.size(); ++i) v *= factors_[i].heat_kernel(t, ds[i]);
        return v;
    };
    double t0 = std::max(1.0, d * d);
    std::vector<double> knots;
    for (double c : {1.0 / 32.0, 1.0 / 8.0, 0.5, 2.0}) {
        double k = c * d * d;
        if (k > 0.0 && k < t0) knots.push_back(k);
    }
    IntegralResult head = adapt_1d(p, 0.0, t0, 1e-10, 0.0, 400000, knots);
    IntegralResult tail = adapt_semi_inf(p, t0, 1e-10, 0.0, 400000);
    return 2.0 * (head.value + tail.value);
}

double ModelManifold::green_rho(double rho_val) const {
    if (green_closed_form()) {
        int n = factors_[0].dim;
        return std::tgamma(n / 2.0 - 1.0) / (2.0 * std::pow(M_PI, n / 2.0)) *
               std::pow(rho_val, 2.0 - n);
    }
    std::vector<double> dir(tangent_dim_, 0.0);
    dir[0] = 1.0;
    return green(base_point(), ray_point(dir, rho_val));
}

double ModelManifold::green_comparison_integral(double rho_val) const {
    if (rho_val <= 0.0)
        throw std::invalid_argument("comparison integral requires rho > 0");
    if (factors_.size() == 1 && factors_[0].kind == Factor::Euclid) {
        int n = factors_[0].dim;
        if (n <= 2) return std::numeric_limits<double>::infinity();
        return std::pow(rho_val, 2.0 - n) / ((n - 2.0) * unit_ball_volume(n));
    }
    if (parabolic_) return std::numeric_limits<double>::infinity();
    IntegralResult res = adapt_semi_inf(
        [&](double t) { return t / volume_of(t); }, rho_val, 1e-9, 0.0, 400000);
    return res.value;
}

// ---------------------------------------------------------------------------
// Sampling

Point ModelManifold::kernel_sample(double t, const CounterRng& rng, std::uint64_t stream,
                                   std::uint64_t& ctr) const {
    Point out(coord_dim_, 0.0);
    int off = 0;
    for (const Factor& f : factors_) {
        f.kernel_sample(t, rng, stream, ctr, out.data() + off);
        off += f.coord_dim();
    }
    return out;
}

Point ModelManifold::ball_sample(double R, const CounterRng& rng, std::uint64_t stream,
                                 std::uint64_t& ctr) const {
    Point out(coord_dim_, 0.0);
    int off = 0;
    for (const Factor& f : factors_) {
        f.ball_sample(R, rng, stream, ctr, out.data() + off);
        off += f.coord_dim();
    }
    return out;
}

double ModelManifold::sample_region_volume(double R) const {
    double v = 1.0;
    for (const Factor& f : factors_) v *= f.ball_volume(R);
    return v;
}

// ---------------------------------------------------------------------------
// Kernel / green constant fits

namespace {

struct RatioProbe {
    const ModelManifold* model;
    Point o;
    std::vector<std::vector<double>> dirs;
};

} // namespace

LiYauConstants ModelManifold::fit_heat_constants(double epsilon) const {
    if (epsilon < 0.0 || epsilon >= 1.0)
        throw std::invalid_argument("epsilon must lie in [0, 1)");
    LiYauConstants k;
    if (factors_.size() == 1 && factors_[0].kind == Factor::Euclid) {
        // Exact on flat space: p (2 V(sqrt t)) = 2 / (Gamma(d/2+1) 2^d) at rho = 0
        // and the gaussian profile matches both bounds at epsilon = 0.
        int d = factors_[0].dim;
        k.epsilon = 0.0;
        k.c1 = k.c2 = 2.0 / (std::tgamma(d / 2.0 + 1.0) * std::pow(2.0, d));
        k.exact = true;
        return k;
    }
    if (!kernel_supported())
        throw std::domain_error("kernel constants need a computable heat kernel");
    k.epsilon = epsilon;
    Point o = base_point();
    auto dirs = direction_grid(tangent_dim_, 8);

    // Ratio of the kernel to each comparison profile at (t, point at arc s).
    auto ratios = [&](double t, const std::vector<double>& dir, double s, double& lo,
                      double& hi) {
        Point x = ray_point(dir, s);
        double d = distance(o, x);
        double p = heat_kernel(t, o, x);
        lo = hi = -1.0;
        if (p <= 0.0) return;
        double v2 = 2.0 * volume_of(std::sqrt(t));
        double elo = d * d / (4.0 * (1.0 - epsilon) * t);
        double ehi = d * d / (4.0 * (1.0 + epsilon) * t);
        if (elo < 600.0) lo = p * v2 * std::exp(elo);
        if (ehi < 600.0) hi = p * v2 * std::exp(ehi);
    };

    double c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
    double bt1 = 1.0, bs1 = 0.0, bt2 = 1.0, bs2 = 0.0;
    std::vector<double> bd1 = dirs[0], bd2 = dirs[0];
    for (double t : logspace(1e-3, 1e3, 25)) {
        double st = std::sqrt(t);
        for (const auto& dir : dirs) {
            for (int i = 0; i <= 40; ++i) {
                double s = i * st;
                double lo, hi;
                ratios(t, dir, s, lo, hi);
                if (lo > 0.0 && lo < c1) { c1 = lo; bt1 = t; bs1 = s; bd1 = dir; }
                if (hi > c2) { c2 = hi; bt2 = t; bs2 = s; bd2 = dir; }
            }
        }
    }

    // Local polish: coordinate ternary search in arc length and log time.
    auto polish = [&](double& t, double& s, const std::vector<double>& dir, bool lower) {
        auto val = [&](double tt, double ss) {
            double lo, hi;
            ratios(tt, dir, ss, lo, hi);
            if (lower) return lo > 0.0 ? lo : std::numeric_limits<double>::infinity();
            return hi;
        };
        for (int round = 0; round < 2; ++round) {
            double a = std::max(0.0, s - std::sqrt(t)), b = s + std::sqrt(t);
            for (int it = 0; it < 40; ++it) {
                double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
                bool keep_left = lower ? (val(t, m1) < val(t, m2)) : (val(t, m1) > val(t, m2));
                (keep_left ? b : a) = keep_left ? m2 : m1;
            }
            s = 0.5 * (a + b);
            double la = std::log(t) - 0.6, lb = std::log(t) + 0.6;
            for (int it = 0; it < 40; ++it) {
                double m1 = la + (lb - la) / 3.0, m2 = lb - (lb - la) / 3.0;
                bool keep_left = lower ? (val(std::exp(m1), s) < val(std::exp(m2), s))
                                       : (val(std::exp(m1), s) > val(std::exp(m2), s));
                (keep_left ? lb : la) = keep_left ? m2 : m1;
            }
            t = std::exp(0.5 * (la + lb));
        }
        return val(t, s);
    };
    double p1 = polish(bt1, bs1, bd1, true);
    if (std::isfinite(p1)) c1 = std::min(c1, p1);
    c2 = std::max(c2, polish(bt2, bs2, bd2, false));

    k.c1 = c1 * (1.0 - 5e-3);
    k.c2 = c2 * (1.0 + 5e-3);
    return k;
}

void ModelManifold::fit_green_constants(LiYauConstants& k) const {
    if (factors_.size() == 1 && factors_[0].kind == Factor::Euclid) {
        if (factors_[0].dim <= 2)
            throw std::domain_error("green constants require a non-parabolic model");
        k.A = k.B = 2.0 / factors_[0].dim;
        return;
    }
    if (parabolic_)
        throw std::domain_error("green constants require a non-parabolic model");
    Point o = base_point();
    auto dirs = direction_grid(tangent_dim_, 8);
    auto ratio = [&](const std::vector<double>& dir, double s) {
        Point x = ray_point(dir, s);
        double d = distance(o, x);
        if (d < 1e-9) return -1.0;
        return green(o, x) / green_comparison_integral(d);
    };
    double A = std::numeric_limits<double>::infinity(), B = 0.0;
    double sA = 1.0, sB = 1.0;
    std::vector<double> dA = dirs[0], dB = dirs[0];
    for (const auto& dir : dirs) {
        for (double s : logspace(0.05, 30.0, 20)) {
            double r = ratio(dir, s);
            if (r <= 0.0) continue;
            if (r < A) { A = r; sA = s; dA = dir; }
            if (r > B) { B = r; sB = s; dB = dir; }
        }
    }
    auto polish = [&](double s, const std::vector<double>& dir, bool lower) {
        double la = std::log(s) - 1.2, lb = std::log(s) + 1.2;
        for (int it = 0; it < 25; ++it) {
            double m1 = la + (lb - la) / 3.0, m2 = lb - (lb - la) / 3.0;
            double v1 = ratio(dir, std::exp(m1)), v2 = ratio(dir, std::exp(m2));
            bool keep_left = lower ? (v1 < v2) : (v1 > v2);
            (keep_left ? lb : la) = keep_left ? m2 : m1;
        }
        return ratio(dir, std::exp(0.5 * (la + lb)));
    };
    double pa = polish(sA, dA, true), pb = polish(sB, dB, false);
    if (pa > 0.0) A = std::min(A, pa);
    B = std::max(B, pb);
    k.A = A * (1.0 - 2e-2);
    k.B = B * (1.0 + 2e-2);
}

// ---------------------------------------------------------------------------
// Complex chart and ricci form

bool ModelManifold::has_complex_chart() const { return n_torus_ == 0; }

bool ModelManifold::flat() const {
    for (const Factor& f : factors_)
        if (f.kind != Factor::Euclid && f.kind != Factor::Circle) return false;
    return true;
}

Point ModelManifold::from_complex(const std::vector<std::complex<double>>& z) const {
    if (!has_complex_chart()) throw std::domain_error("model has no complex chart");
    if ((int)z.size() != complex_dim_)
        throw std::invalid_argument("wrong number of complex coordinates");
    Point out(coord_dim_, 0.0);
    size_t zi = 0;
    int coff = 0;
    switch (base_kind_) {
        case BaseKind::Euclidean: {
            int m = base_complex_dim_;
            for (int j = 0; j < m; ++j) {
                out[2 * j] = z[zi].real();
                out[2 * j + 1] = z[zi].imag();
                ++zi;
            }
            coff = 2 * m;
            break;
        }
        case BaseKind::Cylinder: {
            std::complex<double> w = z[zi++];
            double r = std::abs(w);
            if (r <= 0.0) throw std::invalid_argument("cylinder chart excludes 0");
            out[0] = std::log(r);
            out[1] = wrap(std::arg(w), 2.0 * M_PI);
            coff = 2;
            break;
        }
        case BaseKind::Punctured: {
            int m = base_complex_dim_;
            double n2 = 0.0;
            for (int j = 0; j < m; ++j) n2 += std::norm(z[zi + j]);
            double r = std::sqrt(n2);
            if (r <= 0.0) throw std::invalid_argument("punctured chart excludes 0");
            out[0] = std::log(r);
            for (int j = 0; j < m; ++j) {
                out[1 + 2 * j] = z[zi + j].real() / r;
                out[1 + 2 * j + 1] = z[zi + j].imag() / r;
            }
            zi += m;
            coff = 1 + 2 * m;
            break;
        }
    }
    for (size_t fi = base_factor_count_; fi < factors_.size(); ++fi) {
        const Factor& f = factors_[fi];
        int kk = f.dim / 2;
        for (int j = 0; j < kk; ++j) {
            out[coff + 2 * j] = z[zi].real();
            out[coff + 2 * j + 1] = z[zi].imag();
            ++zi;
        }
        coff += f.coord_dim();
    }
    return out;
}

std::vector<std::complex<double>> ModelManifold::to_complex(const Point& x) const {
    if (!has_complex_chart()) throw std::domain_error("model has no complex chart");
    if ((int)x.size() != coord_dim_)
        throw std::invalid_argument("point has wrong coordinate dimension");
    std::vector<std::complex<double>> z;
    z.reserve(complex_dim_);
    int coff = 0;
    switch (base_kind_) {
        case BaseKind::Euclidean:
            for (int j = 0; j < base_complex_dim_; ++j)
                z.emplace_back(x[2 * j], x[2 * j + 1]);
            coff = 2 * base_complex_dim_;
            break;
        case BaseKind::Cylinder:
            z.push_back(std::exp(x[0]) * std::polar(1.0, x[1]));
            coff = 2;
            break;
        case BaseKind::Punctured: {
            double r = std::exp(x[0]);
            for (int j = 0; j < base_complex_dim_; ++j)
                z.emplace_back(r * x[1 + 2 * j], r * x[1 + 2 * j + 1]);
            coff = 1 + 2 * base_complex_dim_;
            break;
        }
    }
    for (size_t fi = base_factor_count_; fi < factors_.size(); ++fi) {
        const Factor& f = factors_[fi];
        for (int j = 0; j < f.dim / 2; ++j)
            z.emplace_back(x[coff + 2 * j], x[coff + 2 * j + 1]);
        coff += f.coord_dim();
    }
    return z;
}

CMatrix ModelManifold::ricci_form(const Point& x) const {
    CMatrix psi(complex_dim_, std::vector<std::complex<double>>(complex_dim_, 0.0));
    if (flat()) return psi;
    if (!has_complex_chart())
        throw std::domain_error("ricci form needs a complex chart");
    std::vector<std::complex<double>> z = to_complex(x);
    int off = 0;
    if (base_kind_ == BaseKind::Punctured) {
        int m = base_complex_dim_;
        double n2 = 0.0;
        for (int j = 0; j < m; ++j) n2 += std::norm(z[j]);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                std::complex<double> v = -std::conj(z[i]) * z[j];
                if (i == j) v += n2;
                psi[i][j] = 0.5 * m * v / (n2 * n2);
            }
        off = m;
    } else {
        off = base_complex_dim_; // flat block stays zero
    }
    for (size_t fi = base_factor_count_; fi < factors_.size(); ++fi) {
        const Factor& f = factors_[fi];
        if (f.kind != Factor::Projective) continue;
        int kk = f.dim / 2;
        double n2 = 1.0;
        for (int j = 0; j < kk; ++j) n2 += std::norm(z[off + j]);
        for (int i = 0; i < kk; ++i)
            for (int j = 0; j < kk; ++j) {
                std::complex<double> v = -std::conj(z[off + i]) * z[off + j];
                if (i == j) v += n2;
                psi[off + i][off + j] = (kk + 1.0) * 0.5 * v / (n2 * n2);
            }
        off += kk;
    }
    return psi;
}

std::string ModelManifold::describe() const {
    std::ostringstream os;
    os << "model=" << id_ << "\n";
    os << "real_dim=" << real_dim_ << "\n";
    os << "complex_dim=" << complex_dim_ << "\n";
    os << "coord_dim=" << coord_dim_ << "\n";
    os << "parabolic=" << (parabolic_ ? "true" : "false") << "\n";
    os << "kernel=" << (kernel_supported() ? "supported" : "unsupported") << "\n";
    os << "factors=";
    for (size_t i = 0; i < factors_.size(); ++i) {
        if (i) os << " ";
        const Factor& f = factors_[i];
        switch (f.kind) {
            case Factor::Euclid: os << "euclid:" << f.dim; break;
            case Factor::Circle: os << "circle:" << f.scale; break;
            case Factor::Sphere: os << "sphere:" << f.dim << ":" << f.scale; break;
            case Factor::Projective: os << "projective:" << f.dim / 2; break;
        }
    }
    os << "\n";
    return os.str();
}

} // namespace nevlab
