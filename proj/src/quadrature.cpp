#include "nevlab/special.hpp"
#include "nevlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace nevlab {

namespace {

// Gauss-Kronrod 7-15 abscissae on [0,1] side (symmetric); even indices are
// the embedded Gauss-7 points.
constexpr double kGK_x[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kGK_wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kG7_w[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
    double a, b;
    double value;
    double error;
};

// One GK 7-15 panel; returns (I15, |I15-I7| error estimate).
Segment gk15(const Fn1& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kGK_x[i]);
        fv[14 - i] = f(c + h * kGK_x[i]);
    }
    fv[7] = f(c);
    double ik = 0.0, ig = 0.0;
    for (int i = 0; i < 7; ++i) {
        ik += kGK_wk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) ig += kG7_w[i / 2] * (fv[i] + fv[14 - i]);
    }
    ik += kGK_wk[7] * fv[7];
    ig += kG7_w[3] * fv[7];
    Segment s;
    s.a = a;
    s.b = b;
    s.value = ik * h;
    s.error = std::abs((ik - ig) * h);
    // Sharpen the raw difference the usual way: scale by (200*d)^{3/2}.
    double scale = std::abs(s.value);
    if (scale > 0.0 && s.error > 0.0) {
        double d = s.error / scale;
        double sharp = scale * std::min(1.0, std::pow(200.0 * d, 1.5));
        s.error = std::min(s.error, sharp);
    }
    return s;
}

} // namespace

IntegralResult adapt_1d(const Fn1& f, double a, double b, double rel_tol,
                        double abs_tol, long max_evals,
                        const std::vector<double>& knots) {
    IntegralResult res;
    if (!(b > a)) return res;

    std::vector<double> cuts;
    cuts.push_back(a);
    for (double k : knots)
        if (k > a && k < b) cuts.push_back(k);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<Segment> segs;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        segs.push_back(gk15(f, cuts[i], cuts[i + 1]));
        res.evals += 15;
    }

    auto total = [&segs]() {
        std::vector<double> vals(segs.size()), errs(segs.size());
        for (size_t i = 0; i < segs.size(); ++i) {
            vals[i] = segs[i].value;
            errs[i] = segs[i].error;
        }
        return std::make_pair(pairwise_sum(vals), pairwise_sum(errs));
    };

    while (true) {
        auto [val, err] = total();
        double tol = std::max(abs_tol, rel_tol * std::abs(val));
        if (err <= tol || err <= 1e-15 * std::abs(val)) {
            res.value = val;
            res.error = err;
            return res;
        }
        if (res.evals + 30 > max_evals) {
            res.value = val;
            res.error = err;
            res.converged = false;
            return res;
        }
        // Deterministic worst-first refinement; first index wins ties.
        size_t worst = 0;
        for (size_t i = 1; i < segs.size(); ++i)
            if (segs[i].error > segs[worst].error) worst = i;
        Segment s = segs[worst];
        double mid = 0.5 * (s.a + s.b);
        if (!(mid > s.a && mid < s.b)) {
            // Interval no longer splittable in double precision.
            auto [v2, e2] = total();
            res.value = v2;
            res.error = e2;
            res.converged = e2 <= std::max(abs_tol, rel_tol * std::abs(v2));
            return res;
        }
        segs[worst] = gk15(f, s.a, mid);
        segs.push_back(gk15(f, mid, s.b));
        res.evals += 30;
    }
}

IntegralResult adapt_semi_inf(const Fn1& f, double a, double rel_tol,
                              double abs_tol, long max_evals) {
    // t = a + s/(1-s), dt = ds/(1-s)^2 maps s in [0,1) onto [a, inf).
    auto g = [&f, a](double s) {
        double om = 1.0 - s;
        double t = a + s / om;
        return f(t) / (om * om);
    };
    return adapt_1d(g, 0.0, 1.0, rel_tol, abs_tol, max_evals,
                    {0.5, 0.9, 0.99, 0.999});
}

IntegralResult trapezoid_periodic(const Fn1& f, double period, double rel_tol,
                                  int n0, int n_max) {
    IntegralResult res;
    int n = n0;
    double h = period / n;
    std::vector<double> samples(n);
    for (int i = 0; i < n; ++i) samples[i] = f(i * h);
    double prev = pairwise_sum(samples) * h;
    res.evals = n;
    while (n < n_max) {
        // Double: reuse existing samples, add midpoints.
        std::vector<double> next(2 * n);
        for (int i = 0; i < n; ++i) {
            next[2 * i] = samples[i];
            next[2 * i + 1] = f((i + 0.5) * h);
        }
        n *= 2;
        h *= 0.5;
        samples.swap(next);
        res.evals += n / 2;
        double cur = pairwise_sum(samples) * h;
        double err = std::abs(cur - prev);
        if (err <= rel_tol * std::max(1e-300, std::abs(cur))) {
            res.value = cur;
            res.error = err;
            return res;
        }
        prev = cur;
    }
    res.value = prev;
    res.error = std::abs(prev);
    res.converged = false;
    return res;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        std::vector<double> x(n), w(n);
        // Newton iteration from the Chebyshev-angle initial guess.
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = xi;
                for (int l = 2; l <= n; ++l) {
                    double p2 = ((2 * l - 1) * xi * p1 - (l - 1) * p0) / l;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
                double dx = p1 / dp;
                xi -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            double p0 = 1.0, p1 = xi;
            for (int l = 2; l <= n; ++l) {
                double p2 = ((2 * l - 1) * xi * p1 - (l - 1) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
            x[i] = -xi;
            x[n - 1 - i] = xi;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
        }
        it = cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first;
    }
    nodes = it->second.first;
    weights = it->second.second;
}

SphereRule sphere_rule(int dim, int order) {
    SphereRule rule;
    if (dim < 2) throw std::invalid_argument("sphere_rule: dim must be >= 2");
    if (dim == 2) {
        int n = std::max(4, 4 * order);
        double w = 2.0 * M_PI / n;
        for (int i = 0; i < n; ++i) {
            double th = 2.0 * M_PI * i / n;
            rule.nodes.push_back({std::cos(th), std::sin(th)});
            rule.weights.push_back(w);
        }
        return rule;
    }
    if (dim == 3) {
        int nt = std::max(4, 2 * order);
        int np = std::max(8, 4 * order);
        std::vector<double> cx, cw;
        gauss_legendre(nt, cx, cw); // in cos(theta)
        double wp = 2.0 * M_PI / np;
        for (int i = 0; i < nt; ++i) {
            double ct = cx[i];
            double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            for (int j = 0; j < np; ++j) {
                double ph = 2.0 * M_PI * j / np;
                rule.nodes.push_back({st * std::cos(ph), st * std::sin(ph), ct});
                rule.weights.push_back(cw[i] * wp);
            }
        }
        return rule;
    }
    if (dim == 4) {
        // Hopf-style coordinates: x = (cos(psi) e^{i phi1}, sin(psi) e^{i phi2}),
        // area element = cos(psi) sin(psi) dpsi dphi1 dphi2 = (1/2) du dphi1 dphi2
        // with u = sin^2(psi).
        int nu = std::max(4, 2 * order);
        int np = std::max(8, 4 * order);
        std::vector<double> ux, uw;
        gauss_legendre(nu, ux, uw);
        double wp = 2.0 * M_PI / np;
        for (int i = 0; i < nu; ++i) {
            double u = 0.5 * (ux[i] + 1.0);
            double cu = std::sqrt(1.0 - u), su = std::sqrt(u);
            double wu = 0.5 * uw[i] * 0.5; // du = uw/2 on [0,1], extra 1/2 from measure
            for (int j = 0; j < np; ++j) {
                double p1 = 2.0 * M_PI * j / np;
                for (int k = 0; k < np; ++k) {
                    double p2 = 2.0 * M_PI * k / np;
                    rule.nodes.push_back({cu * std::cos(p1), cu * std::sin(p1),
                                          su * std::cos(p2), su * std::sin(p2)});
                    rule.weights.push_back(wu * wp * wp);
                }
            }
        }
        return rule;
    }
    // dim >= 5: recursive x = (cos(theta), sin(theta) * y), y on S^{dim-2},
    // measure sin^{dim-2}(theta) dtheta x dsigma_{dim-2}.
    SphereRule sub = sphere_rule(dim - 1, order);
    int nt = std::max(6, 3 * order);
    std::vector<double> tx, tw;
    gauss_legendre(nt, tx, tw);
    for (int i = 0; i < nt; ++i) {
        double th = 0.5 * (tx[i] + 1.0) * M_PI;
        double wt = 0.5 * M_PI * tw[i] * std::pow(std::sin(th), dim - 2);
        for (size_t j = 0; j < sub.nodes.size(); ++j) {
            std::vector<double> v;
            v.reserve(dim);
            v.push_back(std::cos(th));
            for (double c : sub.nodes[j]) v.push_back(std::sin(th) * c);
            rule.nodes.push_back(std::move(v));
            rule.weights.push_back(wt * sub.weights[j]);
        }
    }
    return rule;
}

namespace {

// Inverse CDF of the density proportional to sin^p on [0, pi], by bisection.
double inv_sin_power_cdf(double u, int p) {
    auto cdf = [p](double th) {
        IntegralResult r = adapt_1d(
            [p](double s) { return std::pow(std::sin(s), p); }, 0.0, th, 1e-12,
            1e-14, 4000);
        return r.value;
    };
    double total = cdf(M_PI);
    double lo = 0.0, hi = M_PI;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u * total)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::vector<std::vector<double>> direction_grid(int dim, int count) {
    std::vector<std::vector<double>> dirs;
    if (dim < 1 || count < 1) return dirs;
    if (dim == 1) {
        dirs.push_back({1.0});
        if (count > 1) dirs.push_back({-1.0});
        return dirs;
    }
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            double th = 2.0 * M_PI * i / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    if (dim == 3) {
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int i = 0; i < count; ++i) {
            double z = 1.0 - 2.0 * (i + 0.5) / count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double ph = 2.0 * M_PI * std::fmod(i / golden, 1.0);
            dirs.push_back({r * std::cos(ph), r * std::sin(ph), z});
        }
        return dirs;
    }
    // dim >= 4: additive (Kronecker) sequence in the angular cube, pushed to
    // the sphere through the per-angle equal-measure maps.
    static const double irr[] = {std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0),
                                 std::sqrt(7.0), std::sqrt(11.0), std::sqrt(13.0),
                                 std::sqrt(17.0), std::sqrt(19.0)};
    int n_ang = dim - 1;
    for (int i = 0; i < count; ++i) {
        std::vector<double> ang(n_ang);
        for (int j = 0; j < n_ang; ++j)
            ang[j] = std::fmod((i + 0.5) * irr[j % 8], 1.0);
        // First n_ang-1 angles carry sin^{p} measure, the last is periodic.
        std::vector<double> v(dim, 1.0);
        double s = 1.0;
        for (int j = 0; j < n_ang - 1; ++j) {
            double th = inv_sin_power_cdf(ang[j], dim - 2 - j);
            v[j] = s * std::cos(th);
            s *= std::sin(th);
        }
        double last = 2.0 * M_PI * ang[n_ang - 1];
        v[dim - 2] = s * std::cos(last);
        v[dim - 1] = s * std::sin(last);
        dirs.push_back(std::move(v));
    }
    return dirs;
}

} // namespace nevlab
