// Damped half-wave evolution (D_t + sign|D| + a0^w - i b0^w) u = 0 on a
// periodic lattice. The |D| part is applied exactly through integrating
// factors (Lawson exponential RK4), so the flat evolution is exact to
// roundoff and the step size is set by the perturbation, not by a CFL bound.
// The damping substep is a sector-quantized approximation of e^{-dt b} built
// as I - sum_m (R Theta_m)(D) V_m(x) (R Theta_m)(D) with sum Theta_m^2 = 1,
// 0 <= V_m < 1: Hermitian with spectrum in (0, 1], hence never expanding.
#pragma once

#include "damping.hpp"
#include "quantize.hpp"

namespace outwave {

struct DampingApplier {
    enum class Kind { None, Scalar, Sector } kind = Kind::None;
    std::function<real(real)> scalar;  // spatially constant b(t)
    DampingSymbol symbol;

    static DampingApplier none() { return {}; }
    static DampingApplier scalarRate(std::function<real(real)> b) {
        DampingApplier d;
        d.kind = Kind::Scalar;
        d.scalar = std::move(b);
        return d;
    }
    static DampingApplier sector(const DampingSymbol& b) {
        DampingApplier d;
        d.kind = Kind::Sector;
        d.symbol = b;
        return d;
    }
};

struct EvolveOptions {
    real dt = 0.25;
    real truncLo = std::pow(2.0, -7);
    real truncHi = std::pow(2.0, 7);  // capped at 0.67 * nyquist
    int sectors = 24;                 // angular sectors for the damping (n = 2)
    real b3Widen = std::pow(2.0, -4); // widened outgoing-selector transition
    real tailErrorThreshold = 1e-2;
    std::vector<real> snapshotTimes;
};

struct EvolveAudit {
    std::vector<real> times, l2;
    real maxStepGrowth = 0;       // max relative one-step L2 increase
    real worstTailMass = 0;       // pre-truncation out-of-band mass fraction
};

struct EvolveResult {
    SpaceTimeField snapshots;
    EvolveAudit audit;
};

namespace detail {

struct SectorTables {
    std::vector<std::vector<real>> theta;  // Theta_m on the frequency lattice
    std::vector<Vec> omega;                 // sector directions
    std::vector<std::vector<real>> xhatDotOmega;  // per sector, on the x lattice
    std::vector<real> radiusX;                     // |x| per lattice point
};

inline SectorTables buildSectors(const Lattice& lat, int M) {
    SectorTables st;
    if (lat.n == 1) M = 2;
    st.omega.resize(M);
    st.theta.assign(M, std::vector<real>(lat.size(), 0.0));
    for (int m = 0; m < M; ++m) {
        if (lat.n == 1) {
            st.omega[m] = Vec(1, m == 0 ? 1.0 : -1.0);
        } else {
            real th = 2 * pi * m / M;
            st.omega[m] = Vec(2, std::cos(th), std::sin(th));
        }
    }
    for (std::size_t i = 0; i < lat.size(); ++i) {
        Vec xi = lat.freq(i);
        if (lat.n == 1) {
            real q = std::pow(2.0, -7);
            real w = smoothstep5((xi[0] + q) / (2 * q));
            st.theta[0][i] = std::sqrt(w);
            st.theta[1][i] = std::sqrt(1 - w);
        } else {
            real beta = std::atan2(xi[1], xi[0]);
            for (int m = 0; m < M; ++m) {
                real u = beta - 2 * pi * m / M;
                while (u > pi) u -= 2 * pi;
                while (u < -pi) u += 2 * pi;
                u *= M / (2 * pi);  // unit spacing between sector centers
                if (u <= -1 || u >= 1) continue;
                real w = smoothstep5(u + 1) - smoothstep5(u);
                st.theta[m][i] = std::sqrt(std::max(w, 0.0));
            }
            if (xi.norm() < 1e-14)
                for (int m = 0; m < M; ++m) st.theta[m][i] = std::sqrt(1.0 / M);
        }
    }
    st.xhatDotOmega.assign(st.omega.size(), std::vector<real>(lat.size(), 0.0));
    st.radiusX.resize(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        Vec x = lat.coord(i);
        real r = x.norm();
        st.radiusX[i] = r;
        for (std::size_t m = 0; m < st.omega.size(); ++m)
            st.xhatDotOmega[m][i] = r < 1e-14 ? 0.0 : x.dot(st.omega[m]) / r;
    }
    return st;
}

}  // namespace detail

class DampedHalfWave {
  public:
    DampedHalfWave(const Lattice& lat, int sign, const SymbolRep& a0, DampingApplier b0,
                   EvolveOptions opt = {})
        : lat_(lat), sign_(sign), b0_(std::move(b0)), opt_(opt) {
        opt_.truncHi = std::min(opt.truncHi, 0.67 * lat.nyquist());
        // xi tables
        absXi_.resize(lat.size());
        trunc_.resize(lat.size());
        for (std::size_t i = 0; i < lat.size(); ++i) {
            real r = lat.freq(i).norm();
            absXi_[i] = r;
            trunc_[i] = dyadicStep(r, std::log2(opt_.truncLo)) *
                        (1 - dyadicStep(r, std::log2(opt_.truncHi)));
        }
        aTables_ = a0.tables(lat, 0.0);
        a0TimeDependent_ = a0.chiRegOn || std::any_of(a0.terms.begin(), a0.terms.end(),
                                                      [](const SepTerm& t) { return bool(t.timeFactor); });
        a0_ = a0;
        if (b0_.kind == DampingApplier::Kind::Sector)
            sectors_ = detail::buildSectors(lat, opt_.sectors);
    }

    // evolve from time s to tEnd, storing requested snapshots (x space)
    EvolveResult run(const GridFunction& u0, real s, real tEnd) {
        EvolveResult res;
        GridFunction uh = toSpectrum(u0);
        truncate(uh);
        real t = s;
        const real dt = opt_.dt;
        std::size_t nextSnap = 0;
        auto snapTimes = opt_.snapshotTimes;
        std::sort(snapTimes.begin(), snapTimes.end());
        auto maybeSnap = [&]() {
            while (nextSnap < snapTimes.size() && snapTimes[nextSnap] <= t + 1e-9) {
                res.snapshots.times.push_back(t);
                res.snapshots.frames.push_back(fromSpectrum(uh));
                ++nextSnap;
            }
        };
        maybeSnap();
        real prevL2 = spectrumL2(uh);
        res.audit.times.push_back(t);
        res.audit.l2.push_back(prevL2);
        int steps = int(std::round((tEnd - s) / dt));
        if (std::abs(s + steps * dt - tEnd) > 1e-6 * dt)
            throw std::invalid_argument("DampedHalfWave: (tEnd - s) must be a multiple of dt");
        for (int k = 0; k < steps; ++k) {
            stepOnce(uh, t, dt);
            t = s + (k + 1) * dt;
            real l2 = spectrumL2(uh);
            res.audit.maxStepGrowth = std::max(res.audit.maxStepGrowth, l2 / prevL2 - 1.0);
            prevL2 = l2;
            res.audit.times.push_back(t);
            res.audit.l2.push_back(l2);
            maybeSnap();
        }
        return res;
    }

    const EvolveOptions& options() const { return opt_; }

  private:
    void truncate(GridFunction& uh) const {
        for (std::size_t i = 0; i < uh.size(); ++i) uh.v[i] *= trunc_[i];
    }

    // N(t, u) = -i a0^w u in the spectral domain, symmetrized separable form
    GridFunction rhsN(real t, const GridFunction& uh) const {
        const auto& tb = tablesAt(t);
        GridFunction out(lat_);
        if (tb.fx.empty()) return out;
        GridFunction u = fromSpectrum(uh);
        GridFunction accX(lat_);
        for (std::size_t m = 0; m < tb.fx.size(); ++m) {
            GridFunction v = uh;
            for (std::size_t i = 0; i < v.size(); ++i) v.v[i] *= tb.gxi[m][i];
            fftInverse(v);
            for (std::size_t i = 0; i < v.size(); ++i) accX.v[i] += tb.fx[m].v[i] * v.v[i];
            GridFunction w = u;
            for (std::size_t i = 0; i < w.size(); ++i) w.v[i] *= tb.fx[m].v[i];
            fftForward(w);
            for (std::size_t i = 0; i < w.size(); ++i) out.v[i] += tb.gxi[m][i] * w.v[i];
        }
        fftForward(accX);
        const cplx mi(0, -1);
        for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = mi * 0.5 * (out.v[i] + accX.v[i]);
        return out;
    }

    void expMultiply(GridFunction& uh, real tau) const {
        // cache phase tables for the two step fractions in use
        for (auto& [cachedTau, table] : expCache_)
            if (cachedTau == tau) {
                for (std::size_t i = 0; i < uh.size(); ++i) uh.v[i] *= table[i];
                return;
            }
        std::vector<cplx> table(uh.size());
        for (std::size_t i = 0; i < uh.size(); ++i) {
            real ph = -sign_ * absXi_[i] * tau;
            table[i] = cplx(std::cos(ph), std::sin(ph));
        }
        for (std::size_t i = 0; i < uh.size(); ++i) uh.v[i] *= table[i];
        expCache_.emplace_back(tau, std::move(table));
        if (expCache_.size() > 4) expCache_.erase(expCache_.begin());
    }

    void stepOnce(GridFunction& uh, real t, real dt) {
        // Lawson-RK4 on u' = L u + N(t, u), L = -i sign |D|
        GridFunction k1 = rhsN(t, uh);
        GridFunction s2 = uh;
        for (std::size_t i = 0; i < s2.size(); ++i) s2.v[i] += 0.5 * dt * k1.v[i];
        expMultiply(s2, 0.5 * dt);
        GridFunction k2 = rhsN(t + 0.5 * dt, s2);

        GridFunction s3 = uh;
        expMultiply(s3, 0.5 * dt);
        for (std::size_t i = 0; i < s3.size(); ++i) s3.v[i] += 0.5 * dt * k2.v[i];
        GridFunction k3 = rhsN(t + 0.5 * dt, s3);

        GridFunction s4 = uh;
        expMultiply(s4, dt);
        GridFunction k3e = k3;
        expMultiply(k3e, 0.5 * dt);
        for (std::size_t i = 0; i < s4.size(); ++i) s4.v[i] += dt * k3e.v[i];
        GridFunction k4 = rhsN(t + dt, s4);

        expMultiply(uh, dt);
        expMultiply(k1, dt);
        GridFunction k23 = k2;
        k23 += k3;
        expMultiply(k23, 0.5 * dt);
        for (std::size_t i = 0; i < uh.size(); ++i)
            uh.v[i] += dt / 6.0 * (k1.v[i] + 2.0 * k23.v[i] + k4.v[i]);

        applyDamping(uh, t, dt);
        truncate(uh);
    }

    void applyDamping(GridFunction& uh, real t, real dt) {
        if (b0_.kind == DampingApplier::Kind::None) return;
        if (b0_.kind == DampingApplier::Kind::Scalar) {
            // commuting scalar damping: exact integral by Simpson
            real b0v = b0_.scalar(t), b1v = b0_.scalar(t + dt / 2), b2v = b0_.scalar(t + dt);
            real integral = dt / 6.0 * (b0v + 4 * b1v + b2v);
            real f = std::exp(-integral);
            for (auto& z : uh.v) z *= f;
            return;
        }
        const DampingSymbol& b = b0_.symbol;
        real tm = t + dt / 2;
        real T0 = b.tau(t), T1 = b.tau(t + dt);
        real kappa = 4.0 * (std::pow(T1, 0.25) - std::pow(T0, 0.25));  // int tau^{-3/4}
        // the pure-|xi| cutoffs phi(b1) phi(b2): hoist the envelope scalars,
        // then R = sqrt(phi1 phi2) per point is plain arithmetic
        const real eV = b.eT(tm), epsV = b.epsT(tm);
        auto p12At = [&](real r) {
            real v1, v2;
            if (epsV <= 0) {
                v1 = (std::pow(2.0, 3.5) + eV - r) > 0 ? 1.0 : 0.0;
                v2 = (r - std::pow(2.0, -3.5) + b.c * eV) > 0 ? 1.0 : 0.0;
            } else {
                v1 = smoothstep5((std::pow(2.0, 3.5) + eV - r) / epsV);
                v2 = smoothstep5((r - std::pow(2.0, -3.5) + b.c * eV) / epsV);
            }
            return v1 * v2;
        };
        std::vector<real> Rtab(uh.size());
        for (std::size_t i = 0; i < uh.size(); ++i) {
            real p12 = p12At(absXi_[i]);
            Rtab[i] = std::sqrt(std::max(p12, 0.0));
            uh.v[i] *= std::exp(-kappa * (1.0 - p12));
        }
        // mixed part through angular sectors at frozen |xi| = 1
        const auto& st = sectors_;
        const int M = int(st.omega.size());
        real T = b.tau(tm);
        GridFunction acc(lat_);
        for (int m = 0; m < M; ++m) {
            GridFunction v = uh;
            for (std::size_t i = 0; i < v.size(); ++i) v.v[i] *= st.theta[m][i] * Rtab[i];
            fftInverse(v);
            for (std::size_t i = 0; i < v.size(); ++i) {
                real r = st.radiusX[i];
                real cg = st.xhatDotOmega[m][i];
                real p3 = smoothstep5((std::pow(2.0, -0.5) + b.selector * cg) / opt_.b3Widen);
                real p4 = DampingSymbol::phi((std::pow(2.0, 6) * T - r) / T);
                real p5 = smoothstep5((r - std::pow(2.0, -5) * T + b.selector * r * cg) /
                                      (std::pow(2.0, -10) * T));
                real W = 1.0 - p3 * p4 * p5;
                v.v[i] *= 1.0 - std::exp(-kappa * W);
            }
            fftForward(v);
            for (std::size_t i = 0; i < v.size(); ++i) acc.v[i] += st.theta[m][i] * Rtab[i] * v.v[i];
        }
        uh -= acc;
    }

    const SymbolRep::Tables& tablesAt(real t) const {
        if (!a0TimeDependent_) return aTables_;
        if (!cachedT_ || *cachedT_ != t) {
            aTables_ = a0_.tables(lat_, t);
            cachedT_ = t;
        }
        return aTables_;
    }

    Lattice lat_;
    int sign_;
    SymbolRep a0_;
    DampingApplier b0_;
    EvolveOptions opt_;
    std::vector<real> absXi_, trunc_;
    mutable SymbolRep::Tables aTables_;
    mutable std::optional<real> cachedT_;
    bool a0TimeDependent_ = false;
    detail::SectorTables sectors_;
    mutable std::vector<std::pair<real, std::vector<cplx>>> expCache_;
};

inline EvolveResult evolveDamped(const GridFunction& u0, real s, real tEnd, int sign,
                                 const SymbolRep& a0, const DampingApplier& b0,
                                 EvolveOptions opt = {}) {
    DampedHalfWave solver(u0.lat, sign, a0, b0, opt);
    return solver.run(u0, s, tEnd);
}

}  // namespace outwave
