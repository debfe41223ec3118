// Dyadic flatness profiles: per-annulus suprema eps_j of the scale-invariant
// coefficient bounds, their slowly-varying relaxation, the smooth envelope
// eps(s) with controlled logarithmic derivative, the frequency-shifted
// eps_k(s), and the damping envelope e(s) = eps^{-1} int_0^s eps(sigma)/sigma.
#pragma once

#include <optional>

#include "metric.hpp"

namespace outwave {

namespace detail {

// shape-preserving cubic Hermite (Fritsch-Carlson slopes), uniform knots
struct Pchip {
    real u0 = 0, du = 1;
    std::vector<real> y, m;

    void build(real start, real step, std::vector<real> vals) {
        u0 = start;
        du = step;
        y = std::move(vals);
        int k = int(y.size());
        m.assign(k, 0);
        if (k < 2) return;
        std::vector<real> d(k - 1);
        for (int i = 0; i + 1 < k; ++i) d[i] = (y[i + 1] - y[i]) / du;
        m[0] = d[0];
        m[k - 1] = d[k - 2];
        for (int i = 1; i + 1 < k; ++i) {
            if (d[i - 1] * d[i] <= 0) m[i] = 0;
            else m[i] = 2 * d[i - 1] * d[i] / (d[i - 1] + d[i]);  // harmonic mean
        }
    }
    real eval(real u, real* deriv = nullptr) const {
        int k = int(y.size());
        real s = (u - u0) / du;
        int i = std::clamp(int(std::floor(s)), 0, k - 2);
        real t = s - i;
        real h00 = (1 + 2 * t) * sq(1 - t), h10 = t * sq(1 - t);
        real h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        if (deriv) {
            real g00 = 6 * t * (t - 1), g10 = (1 - t) * (1 - 3 * t);
            real g01 = -g00, g11 = t * (3 * t - 2);
            *deriv = (g00 * y[i] + g01 * y[i + 1]) / du + g10 * m[i] + g11 * m[i + 1];
        }
        return h00 * y[i] + h01 * y[i + 1] + du * (h10 * m[i] + h11 * m[i + 1]);
    }
};

}  // namespace detail

struct DyadicProfile {
    int jMin = -8, jMax = 12;
    real deltaSv = 0.25;          // slow-variation bound on |ln eps_j - ln eps_{j-1}|
    std::vector<real> raw;        // measured suprema per annulus
    std::vector<real> eps;        // slowly-varying relaxation of raw
    real cSup = 0;                // sup |x|^2 |c|
    std::vector<real> ccProfile;  // per-annulus |x|^4 |c|^2 suprema (squared-sum variant)

    detail::Pchip env;            // ln eps(s) over u = log2 s at octave endpoints
    bool zero = true;

    int count() const { return jMax - jMin + 1; }
    real epsAt(int j) const {
        if (j < jMin || j > jMax) {
            int edge = j < jMin ? jMin : jMax;
            return eps[edge - jMin] * std::exp(-deltaSv * std::abs(j - edge));
        }
        return eps[j - jMin];
    }
    real total() const {
        real s = 0;
        for (real e : eps) s += e;
        return s;
    }

    static std::vector<real> relax(const std::vector<real>& raw, real deltaSv) {
        int k = int(raw.size());
        std::vector<real> out(k, 0);
        for (int j = 0; j < k; ++j)
            for (int m = 0; m < k; ++m)
                out[j] = std::max(out[j], raw[m] * std::exp(-deltaSv * std::abs(j - m)));
        return out;
    }

    void finalize() {
        eps = relax(raw, deltaSv);
        zero = total() <= 0;
        if (zero) return;
        // envelope knots at octave endpoints s = 2^j: value slightly above the
        // larger adjacent eps_j so eps_j <= eps(s) <= 2 eps_j holds octave-wise
        std::vector<real> knots(count() + 1);
        for (int j = jMin; j <= jMax + 1; ++j)
            knots[j - jMin] = std::log(1.05 * std::max(epsAt(j - 1), epsAt(j)));
        env.build(jMin, 1.0, std::move(knots));
    }

    // smooth envelope eps(s); decays geometrically outside the knot range
    real envelope(real s) const {
        if (zero || s <= 0) return 0;
        real u = std::log2(s);
        if (u < jMin) return std::exp(env.eval(jMin)) * std::exp(-deltaSv * (jMin - u));
        if (u > jMax + 1) return std::exp(env.eval(jMax + 1)) * std::exp(-deltaSv * (u - jMax - 1));
        return std::exp(env.eval(u));
    }
    real envelopeDeriv(real s) const {
        if (zero || s <= 0) return 0;
        real u = std::log2(s), L2 = std::log(2.0);
        if (u < jMin) return envelope(s) * deltaSv / (L2 * s);
        if (u > jMax + 1) return -envelope(s) * deltaSv / (L2 * s);
        real d;
        real v = env.eval(u, &d);
        return std::exp(v) * d / (L2 * s);
    }

    // eps_k(s) ~ eps(2^{-k} + s)
    real epsK(int k, real s) const { return envelope(std::pow(2.0, -k) + s); }

    // e(s) = total^{-1} int_0^s eps(sigma)/sigma dsigma (dyadic tail closed form)
    real eFunction(real s) const {
        if (zero || s <= 0) return 0;
        real L2 = std::log(2.0);
        real uLo = jMin, u = std::log2(s);
        // below the knot range the envelope decays geometrically, so the
        // integral from 0 has the closed form ln2 * eps(s)/deltaSv
        if (u <= uLo) return L2 * envelope(s) / deltaSv / total();
        real acc = L2 * envelope(std::pow(2.0, uLo)) / deltaSv;
        int steps = std::max(8, int(std::ceil((u - uLo) * 16)));
        real h = (u - uLo) / steps;
        real prev = envelope(std::pow(2.0, uLo));
        for (int i = 1; i <= steps; ++i) {
            real cur = envelope(std::pow(2.0, uLo + i * h));
            acc += 0.5 * (prev + cur) * h * L2;
            prev = cur;
        }
        return acc / total();
    }
    real eDeriv(real s) const {
        if (zero || s <= 0) return 0;
        return envelope(s) / (total() * s);
    }

    int slowVariationViolations() const {
        int cnt = 0;
        for (int j = 1; j < count(); ++j) {
            real a = eps[j - 1], b = eps[j];
            if (a <= 0 || b <= 0) continue;
            if (std::abs(std::log(b) - std::log(a)) > deltaSv * (1 + 1e-12)) ++cnt;
        }
        return cnt;
    }
};

struct ProfileOptions {
    int samplesPerAxis = 64;  // radius and each angle
    int timeSamples = 9;
    real tWindow = 16;
    real deltaSv = 0.25;
};

// eps_j per (ej): sup over A_j of |x|^2 |D^2 a| + |x| |D a| + |a - M|, with
// space-time derivatives and max-abs entry norms, measured on a sampling
// lattice (a lower bound of the true sup).
inline DyadicProfile flatnessProfile(const MetricField& m, int jMin, int jMax,
                                     ProfileOptions opt = {}) {
    if (jMax < jMin) throw std::invalid_argument("flatnessProfile: empty j range");
    DyadicProfile p;
    p.jMin = jMin;
    p.jMax = jMax;
    p.deltaSv = opt.deltaSv;
    p.raw.assign(p.count(), 0);
    p.ccProfile.assign(p.count(), 0);
    const int n = m.n;
    int nr = std::max(4, opt.samplesPerAxis / 8);
    int na = opt.samplesPerAxis;
    int nb = n == 3 ? std::max(4, opt.samplesPerAxis / 4) : 1;

    for (int j = jMin; j <= jMax; ++j) {
        real supv = 0, supcc = 0;
        for (int it = 0; it < opt.timeSamples; ++it) {
            real t = opt.tWindow * it / std::max(1, opt.timeSamples - 1);
            for (int ir = 0; ir < nr; ++ir) {
                real r = std::pow(2.0, j + real(ir) / nr);
                for (int ia = 0; ia < na; ++ia) {
                    real th = 2 * pi * ia / na;
                    for (int ib = 0; ib < nb; ++ib) {
                        Vec x(n);
                        if (n == 1) {
                            x[0] = (ia % 2 ? -r : r);
                        } else if (n == 2) {
                            x[0] = r * std::cos(th);
                            x[1] = r * std::sin(th);
                        } else {
                            real ph = pi * (ib + 0.5) / nb;
                            x[0] = r * std::sin(ph) * std::cos(th);
                            x[1] = r * std::sin(ph) * std::sin(th);
                            x[2] = r * std::cos(ph);
                        }
                        real d0 = 0, d1 = 0, d2 = 0;
                        for (int al = 0; al <= n; ++al)
                            for (int be = al; be <= n; ++be) {
                                d0 = std::max(d0, std::abs(m.a(al, be, t, x) - minkowskiEntry(al, be)));
                                for (int g = 0; g <= n; ++g) {
                                    real v = m.da(al, be, g, t, x);
                                    if (!std::isfinite(v))
                                        throw std::runtime_error("flatnessProfile: non-finite derivative");
                                    d1 = std::max(d1, std::abs(v));
                                    for (int dd = g; dd <= n; ++dd)
                                        d2 = std::max(d2, std::abs(m.d2a(al, be, g, dd, t, x)));
                                }
                            }
                        supv = std::max(supv, r * r * d2 + r * d1 + d0);
                        real cv = std::abs(m.c(t, x));
                        p.cSup = std::max(p.cSup, r * r * cv);
                        supcc = std::max(supcc, std::pow(r, 4) * cv * cv);
                    }
                }
            }
        }
        p.raw[j - jMin] = supv;
        p.ccProfile[j - jMin] = supcc;
    }
    p.finalize();
    return p;
}

// profile of a scalar field (used for model symbols): same three-term bound
template <class F, class DF, class D2F>
inline DyadicProfile scalarProfile(int n, F&& f, DF&& df, D2F&& d2f, int jMin, int jMax,
                                   real deltaSv = 0.25, int samples = 64) {
    DyadicProfile p;
    p.jMin = jMin;
    p.jMax = jMax;
    p.deltaSv = deltaSv;
    p.raw.assign(p.count(), 0);
    p.ccProfile.assign(p.count(), 0);
    for (int j = jMin; j <= jMax; ++j) {
        real supv = 0;
        for (int ir = 0; ir < samples; ++ir) {
            real r = std::pow(2.0, j + real(ir) / samples);
            for (real sgn : {-1.0, 1.0}) {
                Vec x(n);
                x[0] = sgn * r;
                real d1 = 0, d2 = 0;
                for (int g = 0; g < n; ++g) {
                    d1 = std::max(d1, std::abs(df(x, g)));
                    for (int dd = 0; dd < n; ++dd) d2 = std::max(d2, std::abs(d2f(x, g, dd)));
                }
                supv = std::max(supv, r * r * d2 + r * d1 + std::abs(f(x)));
            }
        }
        p.raw[j - jMin] = supv;
    }
    p.finalize();
    return p;
}

}  // namespace outwave
