// Metric/coefficient presets for P = D_a a^{ab} D_b + b^a D_a + c satisfying
// the asymptotic-flatness hypotheses, with analytic derivatives up to second
// order, the a^{00} = -1 normal-form reduction, and validation reports.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "common.hpp"
#include "grid.hpp"

namespace outwave {

// indices run 0..n with 0 = time
struct MetricField {
    int n = 2;
    std::string preset;
    std::map<std::string, real> params;
    bool normalForm = false;  // a00 == -1 identically

    // coefficient entry a^{al,be}(t,x)
    std::function<real(int, int, real, const Vec&)> a;
    // d_g a^{al,be}, g = 0..n (0 = time derivative)
    std::function<real(int, int, int, real, const Vec&)> da;
    // d_g d_d a^{al,be}
    std::function<real(int, int, int, int, real, const Vec&)> d2a;

    // lower order terms; complex because the normal-form reduction produces
    // imaginary first-order corrections (D = d/i acting on coefficients)
    std::function<cplx(int, real, const Vec&)> b;
    std::function<cplx(int, int, real, const Vec&)> db;
    std::function<real(real, const Vec&)> c;

    Mat aMatrix(real t, const Vec& x) const {
        Mat m(n + 1, n + 1);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) m(i, j) = a(i, j, t, x);
        return m;
    }
};

inline real minkowskiEntry(int al, int be) { return al != be ? 0.0 : (al == 0 ? -1.0 : 1.0); }

// Gentle radial bump, cos^2 in log2(r/R) across `widthOct` octaves with peak
// `amp` at r = R. The slow log-scale variation keeps the scale-invariant
// profile terms |x||grad a| and |x|^2|grad^2 a| comparable to |a - M|, which
// is what keeps the dyadic flatness total small. Vanishes identically for
// r <= R 2^{-W/2}, so the perturbation vanishes at the origin to all orders.
struct BumpProfile {
    real R = 4;
    real amp = 0.06;
    real widthOct = 8;

    real value(real r) const {
        if (r <= 0) return 0;
        real u = std::log2(r / R);
        if (std::abs(u) >= widthOct / 2) return 0;
        return amp * sq(std::cos(pi * u / widthOct));
    }
    real deriv(real r) const {
        if (r <= 0) return 0;
        real u = std::log2(r / R);
        if (std::abs(u) >= widthOct / 2) return 0;
        real du = -amp * (pi / widthOct) * std::sin(2 * pi * u / widthOct);
        return du / (r * std::log(2.0));
    }
    real deriv2(real r) const {
        if (r <= 0) return 0;
        real u = std::log2(r / R);
        if (std::abs(u) >= widthOct / 2) return 0;
        real L2 = std::log(2.0);
        real du = -amp * (pi / widthOct) * std::sin(2 * pi * u / widthOct);
        real d2u = -amp * 2 * sq(pi / widthOct) * std::cos(2 * pi * u / widthOct);
        return (d2u / L2 - du) / (r * r * L2);
    }
};

namespace detail {

// scalar radial field f(|x|) with cartesian first/second derivatives
struct RadialField {
    BumpProfile phi;
    real value(const Vec& x) const { return phi.value(x.norm()); }
    real d(const Vec& x, int i) const {
        real r = x.norm();
        if (r < 1e-14) return 0;
        return phi.deriv(r) * x[i] / r;
    }
    real d2(const Vec& x, int i, int j) const {
        real r = x.norm();
        if (r < 1e-14) return 0;
        real xi = x[i] / r, xj = x[j] / r;
        real del = i == j ? 1.0 : 0.0;
        return phi.deriv2(r) * xi * xj + phi.deriv(r) * (del - xi * xj) / r;
    }
};

struct PresetSpec {
    int n;
    real eps0 = 0, R = 4, omega = 0, bAmp = 0, cAmp = 0;
    real ampScale = 0.06, widthOct = 8;
    Mat B;  // perturbation direction, (n+1)x(n+1)
    bool timeOsc = false;
};

inline MetricField buildPreset(const PresetSpec& ps, const std::string& name,
                               const std::map<std::string, real>& params) {
    MetricField m;
    m.n = ps.n;
    m.preset = name;
    m.params = params;
    m.normalForm = std::abs(ps.B(0, 0)) < 1e-15;  // a00 stays -1 unless B00 != 0

    auto rf = std::make_shared<RadialField>(RadialField{BumpProfile{ps.R, ps.ampScale, ps.widthOct}});
    const real eps0 = ps.eps0, om = ps.omega, bAmp = ps.bAmp, cAmp = ps.cAmp;
    const bool osc = ps.timeOsc;
    const Mat B = ps.B;
    const int n = ps.n;

    auto tf = [osc, om](real t) { return osc ? std::cos(om * t) : 1.0; };
    auto tfd = [osc, om](real t) { return osc ? -om * std::sin(om * t) : 0.0; };
    auto tfd2 = [osc, om](real t) { return osc ? -om * om * std::cos(om * t) : 0.0; };

    m.a = [=](int al, int be, real t, const Vec& x) {
        return minkowskiEntry(al, be) + eps0 * tf(t) * rf->value(x) * B(al, be);
    };
    m.da = [=](int al, int be, int g, real t, const Vec& x) {
        if (g == 0) return eps0 * tfd(t) * rf->value(x) * B(al, be);
        return eps0 * tf(t) * rf->d(x, g - 1) * B(al, be);
    };
    m.d2a = [=](int al, int be, int g, int d, real t, const Vec& x) {
        if (g == 0 && d == 0) return eps0 * tfd2(t) * rf->value(x) * B(al, be);
        if (g == 0) return eps0 * tfd(t) * rf->d(x, d - 1) * B(al, be);
        if (d == 0) return eps0 * tfd(t) * rf->d(x, g - 1) * B(al, be);
        return eps0 * tf(t) * rf->d2(x, g - 1, d - 1) * B(al, be);
    };

    // lower order terms: b^al = bAmp phi(r)/(1+r), c = cAmp phi(r)/(1+r)^2
    m.b = [=](int, real, const Vec& x) -> cplx {
        real r = x.norm();
        return bAmp * rf->value(x) / (1 + r);
    };
    m.db = [=](int, int g, real, const Vec& x) -> cplx {
        if (g == 0) return 0.0;
        real r = x.norm();
        if (r < 1e-14) return 0.0;
        real xi = x[g - 1] / r;
        return bAmp * (rf->d(x, g - 1) / (1 + r) - rf->value(x) * xi / sq(1 + r));
    };
    m.c = [=](real, const Vec& x) {
        real r = x.norm();
        return cAmp * rf->value(x) / sq(1 + r);
    };
    return m;
}

}  // namespace detail

inline std::vector<std::string> metricPresets() {
    return {"flat", "radial_bump", "anisotropic_bump", "time_oscillating", "a00_perturbed"};
}

// Jacobi eigenvalues of a small symmetric matrix
inline std::vector<real> symEigenvalues(Mat A) {
    int m = A.rows;
    for (int sweep = 0; sweep < 64; ++sweep) {
        real off = 0;
        for (int p = 0; p < m; ++p)
            for (int q = p + 1; q < m; ++q) off += sq(A(p, q));
        if (off < 1e-28) break;
        for (int p = 0; p < m; ++p)
            for (int q = p + 1; q < m; ++q) {
                if (std::abs(A(p, q)) < 1e-300) continue;
                real theta = 0.5 * std::atan2(2 * A(p, q), A(q, q) - A(p, p));
                real cth = std::cos(theta), sth = std::sin(theta);
                for (int k = 0; k < m; ++k) {
                    real akp = A(k, p), akq = A(k, q);
                    A(k, p) = cth * akp - sth * akq;
                    A(k, q) = sth * akp + cth * akq;
                }
                for (int k = 0; k < m; ++k) {
                    real apk = A(p, k), aqk = A(q, k);
                    A(p, k) = cth * apk - sth * aqk;
                    A(q, k) = sth * apk + cth * aqk;
                }
            }
    }
    std::vector<real> ev(m);
    for (int i = 0; i < m; ++i) ev[i] = A(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline MetricField makeMetric(const std::string& preset, std::map<std::string, real> params,
                              int n = 2) {
    auto get = [&](const std::string& k, real dflt) {
        auto it = params.find(k);
        return it == params.end() ? dflt : it->second;
    };
    detail::PresetSpec ps;
    ps.n = n;
    ps.eps0 = get("eps0", 0.02);
    ps.R = get("R", 4);
    ps.bAmp = get("b_amp", 0);
    ps.cAmp = get("c_amp", 0);
    ps.ampScale = get("amp_scale", 0.06);
    ps.widthOct = get("width_octaves", 8);
    ps.B = Mat(n + 1, n + 1);

    if (preset == "flat") {
        ps.eps0 = 0;
    } else if (preset == "radial_bump") {
        for (int i = 1; i <= n; ++i) ps.B(i, i) = -1;  // slow-down bump, focusing case
    } else if (preset == "anisotropic_bump") {
        for (int i = 1; i <= n; ++i) ps.B(i, i) = (i == 1) ? -1 : 0.5;
    } else if (preset == "time_oscillating") {
        for (int i = 1; i <= n; ++i) ps.B(i, i) = -1;
        ps.timeOsc = true;
        ps.omega = get("omega", 0.5 / ps.R);
    } else if (preset == "a00_perturbed") {
        ps.B(0, 0) = -1;  // a00 = -1 - eps0 phi, stays negative
        for (int i = 1; i <= n; ++i) ps.B(i, i) = -0.5;
    } else {
        throw std::invalid_argument("makeMetric: unknown preset '" + preset + "'");
    }

    MetricField m = detail::buildPreset(ps, preset, params);

    // hyperbolicity guard on a coarse sample
    for (real t : {0.0, 1.0, 7.0}) {
        for (real r : {0.0, ps.R / 4, ps.R / 2, ps.R, 2 * ps.R, 4 * ps.R}) {
            Vec x(n);
            x[0] = r;
            Mat A = m.aMatrix(t, x);
            if (A(0, 0) >= -0.5)
                throw std::invalid_argument("makeMetric: a00 >= -1/2, hyperbolicity violated");
            Mat S(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) S(i, j) = A(i + 1, j + 1);
            if (symEigenvalues(S).front() <= 0)
                throw std::invalid_argument("makeMetric: spatial block not positive definite");
        }
    }
    return m;
}

// Normal-form reduction (multiply P by -(a00)^{-1}): a -> -a/a00 with the
// lower-order coefficients picking up D((a00)^{-1}) corrections. The cross
// term D_t a^{0i} D_i is rewritten as D_i a^{0i} D_t modulo first-order terms.
inline MetricField reduceNormalForm(const MetricField& src) {
    if (src.normalForm) return src;
    MetricField m;
    m.n = src.n;
    m.preset = src.preset + "(reduced)";
    m.params = src.params;
    m.normalForm = true;
    const int n = src.n;

    auto g = [src](real t, const Vec& x) {
        real a00 = src.a(0, 0, t, x);
        if (a00 >= 0) throw std::runtime_error("reduceNormalForm: a00 >= 0");
        return a00;
    };

    m.a = [src, g](int al, int be, real t, const Vec& x) {
        return -src.a(al, be, t, x) / g(t, x);
    };
    m.da = [src, g](int al, int be, int d, real t, const Vec& x) {
        real a00 = g(t, x);
        real f = src.a(al, be, t, x);
        return -(src.da(al, be, d, t, x) * a00 - f * src.da(0, 0, d, t, x)) / sq(a00);
    };
    m.d2a = [src, g](int al, int be, int d1, int d2, real t, const Vec& x) {
        real G = g(t, x);
        real f = src.a(al, be, t, x);
        real f1 = src.da(al, be, d1, t, x), f2 = src.da(al, be, d2, t, x);
        real g1 = src.da(0, 0, d1, t, x), g2 = src.da(0, 0, d2, t, x);
        real f12 = src.d2a(al, be, d1, d2, t, x), g12 = src.d2a(0, 0, d1, d2, t, x);
        // second derivative of -f/g
        return -f12 / G + (f1 * g2 + f2 * g1 + f * g12) / sq(G) - 2 * f * g1 * g2 / (G * sq(G));
    };

    // b^j -> -b^j/a00 + D_al((a00)^{-1}) a^{al j} ;   D = d/i so the
    // correction is imaginary. Cross-term rearrangement adds (D_t a'^{0j})
    // to b^j and -(D_j a'^{0j}) to b^0 where a' are reduced coefficients.
    m.b = [src, m_da = m.da, g, n](int al, real t, const Vec& x) -> cplx {
        real a00 = g(t, x);
        cplx val = -src.b(al, t, x) / a00;
        const cplx mi(0, -1);  // 1/i
        for (int gam = 0; gam <= n; ++gam) {
            real dInv = -src.da(0, 0, gam, t, x) / sq(a00);
            val += mi * dInv * src.a(gam, al, t, x);
        }
        if (al == 0) {
            for (int j = 1; j <= n; ++j) val -= mi * m_da(0, j, j, t, x);
        } else {
            val += mi * m_da(0, al, 0, t, x);
        }
        return val;
    };
    m.db = [src, m_d2a = m.d2a, g, n](int al, int d, real t, const Vec& x) -> cplx {
        // derivative of the expression above; needs second derivatives of a
        real a00 = g(t, x);
        real da00 = src.da(0, 0, d, t, x);
        cplx val = -src.db(al, d, t, x) / a00 + src.b(al, t, x) * da00 / sq(a00);
        const cplx mi(0, -1);
        for (int gam = 0; gam <= n; ++gam) {
            real dInv = -src.da(0, 0, gam, t, x) / sq(a00);
            real ddInv = -src.d2a(0, 0, gam, d, t, x) / sq(a00) +
                         2 * src.da(0, 0, gam, t, x) * da00 / (a00 * sq(a00));
            val += mi * (ddInv * src.a(gam, al, t, x) + dInv * src.da(gam, al, d, t, x));
        }
        if (al == 0) {
            for (int j = 1; j <= n; ++j) val -= mi * m_d2a(0, j, j, d, t, x);
        } else {
            val += mi * m_d2a(0, al, 0, d, t, x);
        }
        return val;
    };
    m.c = [src, g](real t, const Vec& x) { return -src.c(t, x) / g(t, x); };
    return m;
}

struct MetricReport {
    bool signatureOk = true;
    bool a00Ok = true;
    real worstA00 = -1;
    real minSpatialEig = 1;
    real maxDeviation = 0;  // sup |a - M|
    bool hyperbolicityMarginWarning = false;
    std::vector<std::string> notes;
};

inline MetricReport validateMetric(const MetricField& m, real tMax = 8, int samples = 24) {
    MetricReport rep;
    real R = m.params.count("R") ? m.params.at("R") : 4.0;
    for (int it = 0; it <= 4; ++it) {
        real t = tMax * it / 4.0;
        for (int ir = 0; ir <= samples; ++ir) {
            real r = 16 * R * ir / samples;
            for (int dir = 0; dir < 4; ++dir) {
                Vec x(m.n);
                x[0] = r * std::cos(pi * dir / 4);
                if (m.n > 1) x[1] = r * std::sin(pi * dir / 4);
                Mat A = m.aMatrix(t, x);
                rep.worstA00 = std::max(rep.worstA00, A(0, 0));
                Mat S(m.n, m.n);
                real dev = 0;
                for (int i = 0; i <= m.n; ++i)
                    for (int j = 0; j <= m.n; ++j) dev = std::max(dev, std::abs(A(i, j) - minkowskiEntry(i, j)));
                rep.maxDeviation = std::max(rep.maxDeviation, dev);
                for (int i = 0; i < m.n; ++i)
                    for (int j = 0; j < m.n; ++j) S(i, j) = A(i + 1, j + 1);
                auto ev = symEigenvalues(S);
                rep.minSpatialEig = std::min(rep.minSpatialEig, ev.front());
                auto full = symEigenvalues(A);
                int neg = 0;
                for (real e : full) neg += e < 0;
                if (neg != 1) rep.signatureOk = false;
            }
        }
    }
    rep.a00Ok = rep.worstA00 <= -0.5;
    if (rep.minSpatialEig < 0.95 || rep.maxDeviation > 0.05 || rep.worstA00 > -0.95) {
        rep.hyperbolicityMarginWarning = true;
        rep.notes.push_back("hyperbolicity margin: perturbation exceeds 5% of flat");
    }
    return rep;
}

}  // namespace outwave
