// Phase-space symbols in separable form: finite sums of (x-factor) x
// (xi-factor) terms. x-factors are sparse trigonometric polynomials (exactly
// differentiable, so Hamilton flows see consistent analytic jets), optionally
// multiplied by the outgoing-region cutoff chi_reg(t,x). xi-factors are
// radial windows times angular harmonics with closed-form polar derivatives.
#pragma once

#include <functional>
#include <memory>

#include "fft.hpp"
#include "lp.hpp"

namespace outwave {

struct SymbolJet {
    real v = 0;
    Vec gx, gxi;
    Mat hxx, hxxi, hxixi;  // hxxi(i,j) = d^2 / dx_i dxi_j

    explicit SymbolJet(int n = 2)
        : gx(n), gxi(n), hxx(n, n), hxxi(n, n), hxixi(n, n) {}
};

// real trigonometric polynomial stored as half-spectrum modes
struct SparseFourier {
    struct Mode {
        Vec w;
        cplx c;
        real pf;  // 2 for conjugate pairs, 1 for DC
    };
    std::vector<Mode> modes;
    real quantum = 0;  // frequency quantum 2*pi/L of the source lattice

    static SparseFourier fromField(const GridFunction& f, real relTol = 1e-8) {
        SparseFourier sf;
        sf.quantum = f.lat.freqStep();
        GridFunction fh = toSpectrum(f);
        real scale = 1.0 / real(f.size());
        real top = 0;
        for (const auto& z : fh.v) top = std::max(top, std::abs(z) * scale);
        if (top == 0) return sf;
        int ix[3];
        for (std::size_t i = 0; i < fh.size(); ++i) {
            cplx c = fh.v[i] * scale;
            if (std::abs(c) < relTol * top) continue;
            fh.lat.decode(i, ix);
            // keep one representative of each conjugate pair (skip Nyquist rows)
            bool dc = true, keep = false, nyq = false;
            for (int a = 0; a < fh.lat.n; ++a) {
                int k = ix[a] <= fh.lat.N / 2 ? ix[a] : ix[a] - fh.lat.N;
                if (ix[a] == fh.lat.N / 2) nyq = true;
                if (k != 0 && dc) {
                    keep = k > 0;
                    dc = false;
                }
            }
            if (nyq) continue;
            if (dc) {
                sf.modes.push_back({fh.lat.freq(i), cplx(c.real(), 0), 1.0});
            } else if (keep) {
                sf.modes.push_back({fh.lat.freq(i), c, 2.0});
            }
        }
        return sf;
    }

    std::size_t count() const { return modes.size(); }

    real value(const Vec& x) const {
        real s = 0;
        for (const auto& m : modes) {
            real ph = m.w.dot(x);
            s += m.pf * (m.c.real() * std::cos(ph) - m.c.imag() * std::sin(ph));
        }
        return s;
    }
    void jet(const Vec& x, real& v, Vec& g, Mat& h) const {
        v = 0;
        g = Vec(x.n);
        h = Mat(x.n, x.n);
        for (const auto& m : modes) {
            real ph = m.w.dot(x);
            real cr = std::cos(ph), si = std::sin(ph);
            real re = m.c.real() * cr - m.c.imag() * si;       // Re(c e^{i ph})
            real im = m.c.real() * si + m.c.imag() * cr;       // Im(c e^{i ph})
            v += m.pf * re;
            for (int a = 0; a < x.n; ++a) {
                g[a] += -m.pf * im * m.w[a];
                for (int b = 0; b < x.n; ++b) h(a, b) += -m.pf * re * m.w[a] * m.w[b];
            }
        }
    }

    // exact synthesis when the target lattice shares the frequency quantum
    GridFunction toField(const Lattice& lat) const {
        bool spectral = std::abs(lat.freqStep() - quantum) < 1e-12 * quantum;
        GridFunction out(lat);
        if (spectral) {
            GridFunction fh(lat);
            int ix[3];
            bool ok = true;
            for (const auto& m : modes) {
                for (int a = 0; a < lat.n && ok; ++a) {
                    real kf = m.w[a] / lat.freqStep();
                    int k = int(std::lround(kf));
                    if (std::abs(kf - k) > 1e-9 || std::abs(k) >= lat.N / 2) ok = false;
                    ix[a] = k >= 0 ? k : k + lat.N;
                }
                if (!ok) break;
                fh.v[lat.encode(ix)] += m.c * real(lat.size());
                if (m.pf > 1.5) {
                    for (int a = 0; a < lat.n; ++a) {
                        int k = ix[a] == 0 ? 0 : lat.N - ix[a];
                        ix[a] = k;
                    }
                    fh.v[lat.encode(ix)] += std::conj(m.c) * real(lat.size());
                }
            }
            if (ok) {
                fftInverse(fh);
                return fh;
            }
        }
        for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = value(lat.coord(i));
        return out;
    }
};

// radial window times angular harmonic; hom = homogeneity of the radial part
struct XiFactor {
    int p = 0;
    bool sine = false;
    real hom = 1.0;
    real winLo = -6, winHi = 5;  // transitions [2^lo, 2^{lo+1}], [2^hi, 2^{hi+1}]
    bool windowed = true;

    void radial(real r, real& R, real& R1, real& R2) const {
        if (r <= 0) { R = R1 = R2 = 0; return; }
        real w = 1, w1 = 0, w2 = 0;
        if (windowed) {
            LogStep lo{winLo, 1}, hi{winHi, 1};
            real A = lo(r), A1 = lo.deriv(r), A2 = lo.deriv2(r);
            real B = 1 - hi(r), B1 = -hi.deriv(r), B2 = -hi.deriv2(r);
            w = A * B;
            w1 = A1 * B + A * B1;
            w2 = A2 * B + 2 * A1 * B1 + A * B2;
        }
        real rp = std::pow(r, hom);
        real rp1 = hom * std::pow(r, hom - 1);
        real rp2 = hom * (hom - 1) * std::pow(r, hom - 2);
        R = rp * w;
        R1 = rp1 * w + rp * w1;
        R2 = rp2 * w + 2 * rp1 * w1 + rp * w2;
    }

    real value(const Vec& xi) const {
        real r = xi.norm();
        real R, R1, R2;
        radial(r, R, R1, R2);
        if (R == 0) return 0;
        if (xi.n == 1) {
            real par = (p % 2 != 0 && xi[0] < 0) ? -1.0 : 1.0;
            return R * par;
        }
        real th = std::atan2(xi[1], xi[0]);
        return R * (sine ? std::sin(p * th) : std::cos(p * th));
    }

    void jet(const Vec& xi, real& v, Vec& g, Mat& h) const {
        int n = xi.n;
        v = 0;
        g = Vec(n);
        h = Mat(n, n);
        real r = xi.norm();
        real R, R1, R2;
        radial(r, R, R1, R2);
        if (R == 0 && R1 == 0 && R2 == 0) return;
        if (n == 1) {
            real par = (p % 2 != 0 && xi[0] < 0) ? -1.0 : 1.0;
            real sg = xi[0] >= 0 ? 1.0 : -1.0;
            if (p % 2 == 0) { v = R; g[0] = R1 * sg; h(0, 0) = R2; }
            else { v = R * sg; g[0] = R1; h(0, 0) = R2 * sg; }
            return;
        }
        // polar chain rule in n = 2
        real th = std::atan2(xi[1], xi[0]);
        real A = sine ? std::sin(p * th) : std::cos(p * th);
        real A1 = p * (sine ? std::cos(p * th) : -std::sin(p * th));
        real A2 = -p * p * A;
        Vec er(n, xi[0] / r, xi[1] / r);
        Vec et(n, -er[1], er[0]);
        v = R * A;
        for (int a = 0; a < n; ++a) g[a] = R1 * A * er[a] + R * A1 * et[a] / r;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                real del = a == b ? 1.0 : 0.0;
                real Pab = del - er[a] * er[b];
                h(a, b) = R2 * A * er[a] * er[b] + R1 * A * Pab / r +
                          (R1 * A1 / r - R * A1 / (r * r)) * (er[a] * et[b] + et[a] * er[b]) +
                          R * A2 * et[a] * et[b] / (r * r);
            }
    }

    std::vector<real> table(const Lattice& lat) const {
        std::vector<real> t(lat.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = value(lat.freq(i));
        return t;
    }
};

// outgoing-region cutoff: 0 for |x| <= 2^{floorExp} max(t,1), 1 one octave out
struct ChiReg {
    real floorExp = -8;
    real value(real t, const Vec& x) const {
        LogStep st{floorExp + std::log2(std::max(t, 1.0)), 1};
        return st(x.norm());
    }
    void jet(real t, const Vec& x, real& v, Vec& g, Mat& h) const {
        int n = x.n;
        g = Vec(n);
        h = Mat(n, n);
        real r = x.norm();
        LogStep st{floorExp + std::log2(std::max(t, 1.0)), 1};
        v = st(r);
        if (r < 1e-14) return;
        real d1 = st.deriv(r), d2 = st.deriv2(r);
        Vec er = (1 / r) * x;
        for (int a = 0; a < n; ++a) g[a] = d1 * er[a];
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                real del = a == b ? 1.0 : 0.0;
                h(a, b) = d2 * er[a] * er[b] + d1 * (del - er[a] * er[b]) / r;
            }
    }
};

struct SepTerm {
    SparseFourier fx;
    XiFactor gxi;
    std::function<real(real)> timeFactor;  // optional analytic t-dependence
    real tf(real t) const { return timeFactor ? timeFactor(t) : 1.0; }
};

enum class SymbolClass { S0, S1, S2, L1S2eps };

// A separable symbol sum, optionally riding on a principal part sign*|xi|.
class SymbolRep {
  public:
    int n = 2;
    std::vector<SepTerm> terms;
    real principalSign = 0;  // flow symbols carry sign * |xi|
    bool chiRegOn = false;
    ChiReg chiReg;
    SymbolClass classTag = SymbolClass::L1S2eps;
    real classScale = 0;    // epsilon scale for l1S2_eps membership
    real fitResidual = 0;   // recorded separable-fit residual (relative)

    real eval(real t, const Vec& x, const Vec& xi) const {
        real cr = chiRegOn ? chiReg.value(t, x) : 1.0;
        real s = 0;
        for (const auto& tm : terms) s += tm.tf(t) * tm.fx.value(x) * tm.gxi.value(xi);
        s *= cr;
        if (principalSign != 0) s += principalSign * xi.norm();
        return s;
    }

    SymbolJet jet(real t, const Vec& x, const Vec& xi) const {
        SymbolJet J(n);
        real crV = 1;
        Vec crG(n);
        Mat crH(n, n);
        if (chiRegOn) chiReg.jet(t, x, crV, crG, crH);

        for (const auto& tm : terms) {
            real fv;
            Vec fg(n);
            Mat fh(n, n);
            tm.fx.jet(x, fv, fg, fh);
            real tf = tm.tf(t);
            fv *= tf;
            fg *= tf;
            fh = tf * fh;
            if (chiRegOn) {
                // product rule with the cutoff
                Mat nh(n, n);
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        nh(a, b) = fh(a, b) * crV + fg[a] * crG[b] + crG[a] * fg[b] + fv * crH(a, b);
                Vec ng(n);
                for (int a = 0; a < n; ++a) ng[a] = fg[a] * crV + fv * crG[a];
                fh = nh;
                fg = ng;
                fv = fv * crV;
            }
            real gv;
            Vec gg(n);
            Mat gh(n, n);
            tm.gxi.jet(xi, gv, gg, gh);

            J.v += fv * gv;
            for (int a = 0; a < n; ++a) {
                J.gx[a] += fg[a] * gv;
                J.gxi[a] += fv * gg[a];
                for (int b = 0; b < n; ++b) {
                    J.hxx(a, b) += fh(a, b) * gv;
                    J.hxixi(a, b) += fv * gh(a, b);
                    J.hxxi(a, b) += fg[a] * gg[b];
                }
            }
        }
        if (principalSign != 0) {
            real r = xi.norm();
            if (r > 1e-14) {
                Vec er = (1 / r) * xi;
                J.v += principalSign * r;
                for (int a = 0; a < n; ++a) {
                    J.gxi[a] += principalSign * er[a];
                    for (int b = 0; b < n; ++b) {
                        real del = a == b ? 1.0 : 0.0;
                        J.hxixi(a, b) += principalSign * (del - er[a] * er[b]) / r;
                    }
                }
            }
        }
        return J;
    }

    // lattice tables for separable application: x fields (with chi_reg and
    // time factor folded in) and xi multiplier tables
    struct Tables {
        std::vector<GridFunction> fx;
        std::vector<std::vector<real>> gxi;
    };
    Tables tables(const Lattice& lat, real t) const {
        Tables tb;
        for (const auto& tm : terms) {
            GridFunction f = tm.fx.toField(lat);
            real tf = tm.tf(t);
            if (chiRegOn) {
                for (std::size_t i = 0; i < f.size(); ++i)
                    f.v[i] *= tf * chiReg.value(t, lat.coord(i));
            } else if (tf != 1.0) {
                f *= tf;
            }
            tb.fx.push_back(std::move(f));
            tb.gxi.push_back(tm.gxi.table(lat));
        }
        return tb;
    }

    real maxAbsOnSamples(real t, const std::vector<Vec>& xs, const std::vector<Vec>& xis) const {
        real m = 0;
        for (const auto& x : xs)
            for (const auto& xi : xis) m = std::max(m, std::abs(eval(t, x, xi)));
        return m;
    }
};

// --- symbol class seminorms --------------------------------------------------

struct SeminormEntry {
    int ax = 0, bxi = 0;  // |alpha|, |beta|
    real l1Seminorm = 0;               // sum_j 2^{j(1+(|a|-|b|)/2)} sup_{t ~ 2^j}
    real epsWeightedMax = 0;           // sup over blocks of sup/(eps(t)/t * t^{(|b|-|a|)/2})
    std::vector<real> blockSup;        // per dyadic time block
};

struct SeminormReport {
    int jMin = 0, jMax = 5;
    std::vector<SeminormEntry> entries;

    const SeminormEntry& at(int ax, int bxi) const {
        for (const auto& e : entries)
            if (e.ax == ax && e.bxi == bxi) return e;
        throw std::out_of_range("SeminormReport::at");
    }
};

// measure sups of |d_x^alpha d_xi^beta a| over sampled phase space per dyadic
// time block; orders <= 2 from analytic jets, orders 3..4 by differencing jets
template <class EnvFn>
inline SeminormReport symbolSeminorms(const SymbolRep& a, const EnvFn& envelope, int jMin,
                                      int jMax, int maxOrder = 4) {
    SeminormReport rep;
    rep.jMin = jMin;
    rep.jMax = jMax;
    const int n = a.n;
    for (int ax = 0; ax <= maxOrder; ++ax)
        for (int bxi = 0; ax + bxi <= maxOrder; ++bxi)
            rep.entries.push_back({ax, bxi, 0, 0, std::vector<real>(jMax - jMin + 1, 0)});

    std::function<real(real, const Vec&, const Vec&, int, int)> derivAt =
        [&](real t, const Vec& x, const Vec& xi, int ax, int bxi) -> real {
        // representative mixed derivative magnitude: difference jets along a
        // probe direction when order exceeds the analytic jet depth
        auto pick = [&](const SymbolJet& J, int aa, int bb) -> real {
            if (aa == 0 && bb == 0) return J.v;
            if (aa == 1 && bb == 0) return J.gx.norm();
            if (aa == 0 && bb == 1) return J.gxi.norm();
            if (aa == 2 && bb == 0) return J.hxx.maxAbs();
            if (aa == 1 && bb == 1) return J.hxxi.maxAbs();
            if (aa == 0 && bb == 2) return J.hxixi.maxAbs();
            return 0;
        };
        if (ax + bxi <= 2) return std::abs(pick(a.jet(t, x, xi), ax, bxi));
        // reduce order by central differences in x[0] or xi[0]
        real hstep = 1e-3 * std::max(1.0, x.norm());
        if (ax > 0) {
            Vec xp = x, xm = x;
            xp[0] += hstep;
            xm[0] -= hstep;
            return std::abs(derivAt(t, xp, xi, ax - 1, bxi) - derivAt(t, xm, xi, ax - 1, bxi)) /
                   (2 * hstep);
        }
        real k = 1e-3 * std::max(0.1, xi.norm());
        Vec xip = xi, xim = xi;
        xip[0] += k;
        xim[0] -= k;
        return std::abs(derivAt(t, x, xip, ax, bxi - 1) - derivAt(t, x, xim, ax, bxi - 1)) / (2 * k);
    };

    for (int j = jMin; j <= jMax; ++j) {
        real t = 1.5 * std::pow(2.0, j);
        std::vector<Vec> xs, xis;
        for (int ir = 0; ir < 6; ++ir)
            for (int ia = 0; ia < 8; ++ia) {
                real r = t * std::pow(2.0, -3.0 + ir);
                real th = 2 * pi * ia / 8;
                Vec x(n);
                x[0] = r * std::cos(th);
                if (n > 1) x[1] = r * std::sin(th);
                xs.push_back(x);
            }
        for (int ir = 0; ir < 4; ++ir)
            for (int ia = 0; ia < 8; ++ia) {
                real r = std::pow(2.0, -1.5 + ir);
                real th = 2 * pi * (ia + 0.37) / 8;
                Vec xi(n);
                xi[0] = r * std::cos(th);
                if (n > 1) xi[1] = r * std::sin(th);
                xis.push_back(xi);
            }
        for (auto& e : rep.entries) {
            real sup = 0;
            for (std::size_t px = 0; px < xs.size(); px += 3)
                for (std::size_t pxi = 0; pxi < xis.size(); pxi += 2)
                    sup = std::max(sup, derivAt(t, xs[px], xis[pxi], e.ax, e.bxi));
            e.blockSup[j - jMin] = sup;
            e.l1Seminorm += std::pow(2.0, j * (1.0 + 0.5 * (e.ax - e.bxi))) * sup;
            if (e.ax + e.bxi == 2) {
                real eps = envelope(t);
                if (eps > 0) {
                    real weight = eps / t * std::pow(t, 0.5 * (e.bxi - e.ax));
                    e.epsWeightedMax = std::max(e.epsWeightedMax, sup / weight);
                }
            }
        }
    }
    return rep;
}

}  // namespace outwave
