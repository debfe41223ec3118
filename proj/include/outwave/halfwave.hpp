// Half-wave factorization symbols a^{+-} and the normalizer l, their k = 0
// mollifications (applied per spherical direction, since square roots do not
// commute with frequency truncation), and assembly of the frequency-1
// perturbation symbol a_0 = chi_freq chi_reg (a^{s}_(0) - s|xi|) in separable
// angular-harmonic form.
#pragma once

#include "metric.hpp"
#include "paradiff.hpp"
#include "profile.hpp"
#include "symbol.hpp"

namespace outwave {

// a^{+-}(t,x,xi) = -a^{0j} xi_j +- sqrt((a^{0j} xi_j)^2 + a^{ij} xi_i xi_j)
inline real halfwaveSymbol(const MetricField& m, real t, const Vec& x, const Vec& xi, int sign) {
    if (!m.normalForm) throw std::invalid_argument("halfwaveSymbol: metric not in normal form");
    if (xi.norm() < 1e-300) throw std::invalid_argument("halfwaveSymbol: xi = 0");
    real cross = 0, quad = 0;
    for (int j = 1; j <= m.n; ++j) {
        cross += m.a(0, j, t, x) * xi[j - 1];
        for (int i = 1; i <= m.n; ++i) quad += m.a(i, j, t, x) * xi[i - 1] * xi[j - 1];
    }
    real rad = cross * cross + quad;
    if (rad <= 0) throw std::runtime_error("halfwaveSymbol: nonpositive radicand (hyperbolicity)");
    return -cross + (sign >= 0 ? 1.0 : -1.0) * std::sqrt(rad);
}

// l = (a^+ - a^-)^{-1}
inline real lSymbol(const MetricField& m, real t, const Vec& x, const Vec& xi) {
    real ap = halfwaveSymbol(m, t, x, xi, +1);
    real am = halfwaveSymbol(m, t, x, xi, -1);
    return 1.0 / (ap - am);
}

struct BuildA0Options {
    Lattice lat{2, 256, 256.0};  // mollification lattice for the x fields
    int directions = 16;          // angular samples (n = 2)
    real fitTol = 1e-3;           // relative separable-fit residual tolerance
    real modeTol = 1e-8;          // sparse-Fourier coefficient threshold
    real t = 0;                   // construction time (fields rebuilt per t family)
    real chiRegFloorExp = -8;
    real winLo = -6, winHi = 5;   // chi_freq support [2^-6, 2^6]
};

namespace detail {

// mollified direction fields h(x, omega_d) for g = a^{sign}(t,x,omega) - sign
inline std::vector<GridFunction> mollifiedDirectionFields(const MetricField& m, int sign,
                                                          const BuildA0Options& opt,
                                                          std::vector<Vec>* dirsOut) {
    std::vector<Vec> dirs;
    if (m.n == 1) {
        dirs = {Vec(1, 1.0), Vec(1, -1.0)};
    } else if (m.n == 2) {
        for (int d = 0; d < opt.directions; ++d) {
            real th = 2 * pi * d / opt.directions;
            dirs.push_back(Vec(2, std::cos(th), std::sin(th)));
        }
    } else {
        throw std::invalid_argument("buildA0: separable angular expansion implemented for n <= 2");
    }
    std::vector<GridFunction> fields;
    for (const auto& om : dirs) {
        GridFunction g = GridFunction::sample(opt.lat, [&](const Vec& x) {
            return halfwaveSymbol(m, opt.t, x, om, sign) - real(sign);
        });
        fields.push_back(mollifyField(g, 0));
    }
    if (dirsOut) *dirsOut = dirs;
    return fields;
}

}  // namespace detail

// Builds a_0(t,x,xi) = chi_freq(xi) chi_reg(t,x) (a^{sign}_(0)(t,x,xi) - sign |xi|)
// with a^{sign}_(0) extended 1-homogeneously from mollified unit-sphere fields.
// Separable terms are angular Fourier harmonics; the x factors are the sparse
// trigonometric polynomials of the (heavily low-passed) mollified fields.
inline SymbolRep buildA0(const MetricField& m, const DyadicProfile& prof, int sign,
                         BuildA0Options opt = {}) {
    if (!m.normalForm) throw std::invalid_argument("buildA0: metric not in normal form");
    opt.lat.n = m.n;
    std::vector<Vec> dirs;
    auto fields = detail::mollifiedDirectionFields(m, sign, opt, &dirs);
    const int M = int(fields.size());

    SymbolRep rep;
    rep.n = m.n;
    rep.chiRegOn = true;
    rep.chiReg.floorExp = opt.chiRegFloorExp;
    rep.classTag = SymbolClass::L1S2eps;
    rep.classScale = prof.total();

    real top = 0;
    for (const auto& f : fields) top = std::max(top, f.linf());
    if (top < 1e-12) {
        rep.fitResidual = 0;
        return rep;  // flat metric (up to roundoff): a0 is identically zero
    }

    auto mkXi = [&](int p, bool sine) {
        XiFactor g;
        g.p = p;
        g.sine = sine;
        g.hom = 1.0;
        g.winLo = opt.winLo;
        g.winHi = opt.winHi;
        return g;
    };

    if (m.n == 1) {
        GridFunction even = fields[0], odd = fields[0];
        for (std::size_t i = 0; i < even.size(); ++i) {
            even.v[i] = 0.5 * (fields[0].v[i] + fields[1].v[i]);
            odd.v[i] = 0.5 * (fields[0].v[i] - fields[1].v[i]);
        }
        if (even.linf() > opt.modeTol * top)
            rep.terms.push_back({SparseFourier::fromField(even, opt.modeTol), mkXi(0, false), {}});
        if (odd.linf() > opt.modeTol * top)
            rep.terms.push_back({SparseFourier::fromField(odd, opt.modeTol), mkXi(1, false), {}});
        rep.fitResidual = 0;  // two directions, two terms: exact
        return rep;
    }

    // angular DFT across directions: h(x, th) = sum_p hat_p(x) e^{ip th}
    int P = M / 2 - 1;
    std::vector<GridFunction> cosF(P + 1, GridFunction(opt.lat)), sinF(P + 1, GridFunction(opt.lat));
    for (int p = 0; p <= P; ++p) {
        for (int d = 0; d < M; ++d) {
            real th = 2 * pi * d / M;
            real wc = std::cos(p * th) * (p == 0 ? 1.0 : 2.0) / M;
            real ws = std::sin(p * th) * 2.0 / M;
            for (std::size_t i = 0; i < cosF[p].size(); ++i) {
                cosF[p].v[i] += wc * fields[d].v[i];
                if (p > 0) sinF[p].v[i] += ws * fields[d].v[i];
            }
        }
    }
    // keep harmonics until the reconstruction residual meets the tolerance
    std::vector<bool> keepC(P + 1, false), keepS(P + 1, false);
    auto residual = [&]() {
        real worst = 0;
        for (int d = 0; d < M; ++d) {
            real th = 2 * pi * d / M;
            for (std::size_t i = 0; i < fields[d].size(); i += 7) {
                cplx acc = 0;
                for (int p = 0; p <= P; ++p) {
                    if (keepC[p]) acc += cosF[p].v[i] * std::cos(p * th);
                    if (p > 0 && keepS[p]) acc += sinF[p].v[i] * std::sin(p * th);
                }
                worst = std::max(worst, std::abs(fields[d].v[i] - acc));
            }
        }
        return worst / top;
    };
    // greedy: add harmonics by decreasing sup norm
    std::vector<std::pair<real, int>> order;  // (norm, +p for cos, -(p) for sin)
    for (int p = 0; p <= P; ++p) {
        order.push_back({cosF[p].linf(), p + 1});
        if (p > 0) order.push_back({sinF[p].linf(), -(p + 1)});
    }
    std::sort(order.begin(), order.end(), [](auto& a, auto& b) { return a.first > b.first; });
    real res = 1;
    for (const auto& [nrm, code] : order) {
        if (nrm < opt.modeTol * top) break;
        if (code > 0) keepC[code - 1] = true;
        else keepS[-code - 1] = true;
        res = residual();
        if (res <= opt.fitTol) break;
    }
    if (res > opt.fitTol)
        throw std::runtime_error("buildA0: separable fit residual above tolerance");
    rep.fitResidual = res;

    for (int p = 0; p <= P; ++p) {
        if (keepC[p])
            rep.terms.push_back({SparseFourier::fromField(cosF[p], opt.modeTol), mkXi(p, false), {}});
        if (p > 0 && keepS[p])
            rep.terms.push_back({SparseFourier::fromField(sinF[p], opt.modeTol), mkXi(p, true), {}});
    }
    return rep;
}

// Mollified normalizer L_(0): l is (-1)-homogeneous with flat value 1/(2|xi|);
// the direction fields l(t,x,omega) - 1/2 are mollified like the coefficients.
inline SymbolRep buildL0(const MetricField& m, BuildA0Options opt = {}) {
    if (!m.normalForm) throw std::invalid_argument("buildL0: metric not in normal form");
    opt.lat.n = m.n;
    std::vector<Vec> dirs;
    if (m.n == 1) dirs = {Vec(1, 1.0), Vec(1, -1.0)};
    else
        for (int d = 0; d < opt.directions; ++d) {
            real th = 2 * pi * d / opt.directions;
            dirs.push_back(Vec(2, std::cos(th), std::sin(th)));
        }

    SymbolRep rep;
    rep.n = m.n;
    rep.chiRegOn = false;

    auto mkXi = [&](int p, bool sine) {
        XiFactor g;
        g.p = p;
        g.sine = sine;
        g.hom = -1.0;
        g.winLo = -7.5;  // keep L_(0) alive on the whole truncation band
        g.winHi = 7.0;
        return g;
    };

    // constant part 1/2 (exact flat value)
    std::vector<GridFunction> fields;
    for (const auto& om : dirs) {
        GridFunction g = GridFunction::sample(opt.lat, [&](const Vec& x) {
            return lSymbol(m, opt.t, x, om) - 0.5;
        });
        fields.push_back(mollifyField(g, 0));
    }
    GridFunction half(opt.lat);
    for (auto& z : half.v) z = 0.5;
    {
        SparseFourier c = SparseFourier::fromField(half, 1e-14);
        rep.terms.push_back({c, mkXi(0, false), {}});
    }
    int M = int(dirs.size());
    if (m.n == 1) {
        GridFunction even = fields[0], odd = fields[0];
        for (std::size_t i = 0; i < even.size(); ++i) {
            even.v[i] = 0.5 * (fields[0].v[i] + fields[1].v[i]);
            odd.v[i] = 0.5 * (fields[0].v[i] - fields[1].v[i]);
        }
        if (even.linf() > 0) rep.terms.push_back({SparseFourier::fromField(even, opt.modeTol), mkXi(0, false), {}});
        if (odd.linf() > 0) rep.terms.push_back({SparseFourier::fromField(odd, opt.modeTol), mkXi(1, false), {}});
        return rep;
    }
    int P = std::min(4, M / 2 - 1);
    for (int p = 0; p <= P; ++p) {
        GridFunction cf(opt.lat), sf(opt.lat);
        for (int d = 0; d < M; ++d) {
            real th = 2 * pi * d / M;
            real wc = std::cos(p * th) * (p == 0 ? 1.0 : 2.0) / M;
            real ws = std::sin(p * th) * 2.0 / M;
            for (std::size_t i = 0; i < cf.size(); ++i) {
                cf.v[i] += wc * fields[d].v[i];
                if (p > 0) sf.v[i] += ws * fields[d].v[i];
            }
        }
        real top = std::max(cf.linf(), sf.linf());
        if (cf.linf() > 1e-12 && cf.linf() > 1e-6 * top)
            rep.terms.push_back({SparseFourier::fromField(cf, opt.modeTol), mkXi(p, false), {}});
        if (p > 0 && sf.linf() > 1e-12 && sf.linf() > 1e-6 * top)
            rep.terms.push_back({SparseFourier::fromField(sf, opt.modeTol), mkXi(p, true), {}});
    }
    return rep;
}

// 1d model perturbation symbol eps0 g~(x) chi_freq(|xi|) |xi| for the phase
// space diagnostics (metric presets are n >= 2; this supplies the n = 1 lane)
inline SymbolRep makeModelSymbol1d(real eps0, real R, const Lattice& lat1d,
                                   real winLo = -6, real winHi = 5) {
    BumpProfile bump{R, 0.22 * 1.0, 8};
    GridFunction g = GridFunction::sample(lat1d, [&](const Vec& x) {
        return eps0 * bump.value(std::abs(x[0]));
    });
    GridFunction gm = mollifyField(g, 0);
    SymbolRep rep;
    rep.n = 1;
    rep.chiRegOn = false;
    XiFactor gx;
    gx.p = 0;
    gx.hom = 1.0;
    gx.winLo = winLo;
    gx.winHi = winHi;
    rep.terms.push_back({SparseFourier::fromField(gm, 1e-8), gx, {}});
    rep.classTag = SymbolClass::L1S2eps;
    rep.classScale = eps0;
    return rep;
}

}  // namespace outwave
