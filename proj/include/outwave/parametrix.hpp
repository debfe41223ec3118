// Outgoing parametrix assembly: the angular phase-space partition p_j^{+-}
// quantized through rotation-invariant harmonics, the damped half-wave
// branches S_j^{+-} with per-j time-shifted damping, the assembled K_0 with
// forward/backward jump convention, the full-wave K_00 + K_01 correction, and
// the localization/decay diagnostics.
#pragma once

#include "evolve.hpp"
#include "halfwave.hpp"
#include "oracle.hpp"

namespace outwave {

// ---------------------------------------------------------------------------
// p_j^{sign}(x, xi) = band(|xi|) chi_j(|x|) theta^{sign}(xhat . xi), with
// theta^{+} + theta^{-} = 1 and supp theta^{sign} in {sign x.xi >= -2^{-5}|x|}.
// Quantization expands theta(r cos g) in cos(q g) harmonics, which splits the
// symbol into separable (x-factor) x (xi-factor) pairs per harmonic.
struct PartitionOptions {
    int maxHarmonic = 220;
    real selectorHalfWidth = std::pow(2.0, -5);
    int radialBins = 384;
    int angularQuad = 2048;
};

class PartitionQuantizer {
  public:
    using Options = PartitionOptions;

    PartitionQuantizer(const Lattice& lat, int sign, Options opt = {})
        : lat_(lat), sign_(sign), opt_(opt) {
        // radial harmonic tables A_q(r) for the band-weighted selector
        rMax_ = 4.5;  // band(|xi|) vanishes beyond 2 sqrt(2); headroom
        int Q = lat.n == 1 ? 1 : opt_.maxHarmonic;
        aTab_.assign(std::size_t(Q + 1) * opt_.radialBins, 0.0);
        if (lat.n > 1) {
            // cos-coefficients of theta(r cos g) per radius via one FFT per bin
            Lattice ring{1, opt_.angularQuad, 2 * pi};
            for (int ir = 0; ir < opt_.radialBins; ++ir) {
                real r = rMax_ * (ir + 0.5) / opt_.radialBins;
                GridFunction row(ring);
                for (int ig = 0; ig < opt_.angularQuad; ++ig)
                    row.v[ig] = theta(r * std::cos(2 * pi * ig / opt_.angularQuad));
                fftForward(row);
                for (int q = 0; q <= Q; ++q)
                    aTab_[std::size_t(q) * opt_.radialBins + ir] =
                        row.v[q].real() * (q == 0 ? 1.0 : 2.0) / opt_.angularQuad;
            }
        }
    }

    real theta(real w) const {
        real c0 = opt_.selectorHalfWidth;
        return smoothstep9((sign_ * w + c0) / (2 * c0));
    }
    // C^4 version of s_{-1} + s_0 + s_1 (same support and plateau)
    static real band(real r) {
        if (r <= 0) return 0;
        real u = std::log2(r);
        return smoothstep9(2 * (u + 2)) * (1 - smoothstep9(2 * (u - 1)));
    }
    static real chiJ(real r, int j) {
        return j == 0 ? lpWindowBelow(r, 1) : lpWindow(r, j);
    }

    // exact symbol value
    real symbol(int j, const Vec& x, const Vec& xi) const {
        real rx = x.norm();
        real w = rx < 1e-14 ? 0.0 : x.dot(xi) / rx;
        return band(xi.norm()) * chiJ(rx, j) * theta(w);
    }

    real harmonic(int q, real r) const {
        if (r <= 0 || r >= rMax_) return 0;
        real u = r / rMax_ * opt_.radialBins - 0.5;
        int i0 = std::clamp(int(std::floor(u)), 0, opt_.radialBins - 2);
        real fr = std::clamp(u - i0, 0.0, 1.0);
        const real* row = &aTab_[std::size_t(q) * opt_.radialBins];
        return (1 - fr) * row[i0] + fr * row[i0 + 1];
    }

    // (P_j^{sign})^w u by the symmetrized separable rule over harmonics
    GridFunction apply(const GridFunction& u, int j) const {
        GridFunction uh = toSpectrum(u);
        GridFunction accX(lat_), accF(lat_);
        GridFunction uX = u;
        const int Q = lat_.n == 1 ? 0 : opt_.maxHarmonic;
        std::vector<real> rx(lat_.size()), alpha(lat_.size());
        for (std::size_t i = 0; i < lat_.size(); ++i) {
            Vec x = lat_.coord(i);
            rx[i] = x.norm();
            alpha[i] = lat_.n == 1 ? (x[0] >= 0 ? 0.0 : pi) : std::atan2(x[1], x[0]);
        }
        auto addTerm = [&](auto&& fX, auto&& gXi) {
            GridFunction v = uh;
            for (std::size_t i = 0; i < v.size(); ++i) v.v[i] *= gXi(i);
            fftInverse(v);
            for (std::size_t i = 0; i < v.size(); ++i) accX.v[i] += fX(i) * v.v[i];
            GridFunction w = uX;
            for (std::size_t i = 0; i < w.size(); ++i) w.v[i] *= fX(i);
            fftForward(w);
            for (std::size_t i = 0; i < w.size(); ++i) accF.v[i] += gXi(i) * w.v[i];
        };
        if (lat_.n == 1) {
            // theta depends on sgn(x) sgn(xi) |xi|: split by the sign of x
            for (int sx : {+1, -1}) {
                addTerm(
                    [&](std::size_t i) {
                        Vec x = lat_.coord(i);
                        bool side = sx > 0 ? x[0] >= 0 : x[0] < 0;
                        return side ? chiJ(rx[i], j) : 0.0;
                    },
                    [&](std::size_t i) {
                        Vec xi = lat_.freq(i);
                        return band(xi.norm()) * theta(sx * xi[0]);
                    });
            }
        } else {
            for (int q = 0; q <= Q; ++q) {
                addTerm([&](std::size_t i) { return chiJ(rx[i], j) * std::cos(q * alpha[i]); },
                        [&](std::size_t i) {
                            Vec xi = lat_.freq(i);
                            real r = xi.norm();
                            real beta = std::atan2(xi[1], xi[0]);
                            return band(r) * harmonic(q, r) * std::cos(q * beta);
                        });
                if (q == 0) continue;
                addTerm([&](std::size_t i) { return chiJ(rx[i], j) * std::sin(q * alpha[i]); },
                        [&](std::size_t i) {
                            Vec xi = lat_.freq(i);
                            real r = xi.norm();
                            real beta = std::atan2(xi[1], xi[0]);
                            return band(r) * harmonic(q, r) * std::sin(q * beta);
                        });
            }
        }
        fftInverse(accF);
        GridFunction out(lat_);
        for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = 0.5 * (accX.v[i] + accF.v[i]);
        return out;
    }

  private:
    Lattice lat_;
    int sign_;
    Options opt_;
    real rMax_;
    std::vector<real> aTab_;
};

// ---------------------------------------------------------------------------
// apply the damping symbol b (not its exponential) through the same sector
// quantization the evolution uses; used for the damped-mass and residual
// diagnostics, ||b0^w u||.
inline GridFunction applyDampingSector(const DampingSymbol& b, const GridFunction& u, real t,
                                       int sectors = 24, real b3Widen = std::pow(2.0, -4)) {
    const Lattice& lat = u.lat;
    auto st = detail::buildSectors(lat, sectors);
    real T = b.tau(t);
    real rate = std::pow(T, -0.75);
    const real eV = b.eT(t), epsV = b.epsT(t);
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
    GridFunction uh = toSpectrum(u);
    std::vector<real> Rtab(uh.size());
    GridFunction out = uh;
    for (std::size_t i = 0; i < uh.size(); ++i) {
        real p12 = p12At(lat.freq(i).norm());
        Rtab[i] = std::sqrt(std::max(p12, 0.0));
        out.v[i] *= rate * (1.0 - p12);
    }
    for (std::size_t m = 0; m < st.omega.size(); ++m) {
        GridFunction v = uh;
        for (std::size_t i = 0; i < v.size(); ++i) v.v[i] *= st.theta[m][i] * Rtab[i];
        fftInverse(v);
        for (std::size_t i = 0; i < v.size(); ++i) {
            real r = st.radiusX[i];
            real cg = st.xhatDotOmega[m][i];
            real p3 = smoothstep5((std::pow(2.0, -0.5) + b.selector * cg) / b3Widen);
            real p4 = DampingSymbol::phi((std::pow(2.0, 6) * T - r) / T);
            real p5 = smoothstep5((r - std::pow(2.0, -5) * T + b.selector * r * cg) /
                                  (std::pow(2.0, -10) * T));
            v.v[i] *= rate * (1.0 - p3 * p4 * p5);
        }
        fftForward(v);
        for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += st.theta[m][i] * Rtab[i] * v.v[i];
    }
    fftInverse(out);
    return out;
}

// ---------------------------------------------------------------------------

struct ParametrixOptions {
    int jMax = 4;
    real partitionResidualTol = 1e-3;
    EvolveOptions evo;
    PartitionQuantizer::Options partition;
};

struct ParametrixRun {
    real s = 8;
    int sign = +1;
    std::vector<int> js;
    std::vector<GridFunction> sources;        // (P_j)^w f
    std::vector<EvolveResult> branches;       // per j
    SpaceTimeField sum;                       // assembled K_0(t, s) f for t > s
    GridFunction fBand;                       // band-projected source
    real partitionResidual = 0;
    real dataL1 = 0;
};

// forward assembly K_0(t,s) f = sum_j S_j^+(t,s) (P_j^+)^w f for t > s; the
// damping of branch j runs on the shifted clock tau = t - s + 2^j
inline ParametrixRun assembleK0(const GridFunction& f, const SymbolRep& a0,
                                const DyadicProfile& prof, real s, ParametrixOptions opt) {
    const Lattice& lat = f.lat;
    ParametrixRun run;
    run.s = s;
    run.dataL1 = f.l1();
    PartitionQuantizer part(lat, +1, opt.partition);
    PartitionQuantizer partM(lat, -1, opt.partition);

    run.fBand = f;
    applyMultiplier(run.fBand, [](const Vec& xi) { return PartitionQuantizer::band(xi.norm()); });

    GridFunction covered(lat);
    for (int j = 0; j <= opt.jMax; ++j) {
        GridFunction pj = part.apply(f, j);
        GridFunction mj = partM.apply(f, j);
        covered += pj;
        covered += mj;
        run.js.push_back(j);
        run.sources.push_back(std::move(pj));
    }
    GridFunction resid = covered;
    resid -= run.fBand;
    run.partitionResidual = resid.l2() / std::max(run.fBand.l2(), 1e-300);
    if (run.partitionResidual > opt.partitionResidualTol)
        throw std::runtime_error("assembleK0: partition residual above tolerance (raise jMax)");

    for (std::size_t bi = 0; bi < run.js.size(); ++bi) {
        int j = run.js[bi];
        DampingSymbol b = buildDamping(j, prof);
        b.timeShift = std::pow(2.0, j) - s;
        EvolveOptions evo = opt.evo;
        auto res = evolveDamped(run.sources[bi], s, opt.evo.snapshotTimes.back(), +1, a0,
                                DampingApplier::sector(b), evo);
        if (run.sum.frames.empty()) {
            run.sum = res.snapshots;
        } else {
            for (std::size_t k = 0; k < run.sum.frames.size(); ++k)
                run.sum.frames[k] += res.snapshots.frames[k];
        }
        run.branches.push_back(std::move(res));
    }
    return run;
}

struct SnapshotDiagnostics {
    real t = 0;
    real l2 = 0, linf = 0;
    real innerMassPaper = 0, innerMassDesk = 0;
    real outerMassPaper = 0;
    real freqTailLow = 0, freqTailHigh = 0;
    real dampedMass = 0;
    real dispersive = 0;  // ||u||_inf / ||f||_1
};

// per-snapshot localization audit of a damped branch (or of the assembled sum
// with j the smallest contributing index)
inline std::vector<SnapshotDiagnostics> branchDiagnostics(
    const SpaceTimeField& snaps, real s, int j, const DampingSymbol* b, real dataL1,
    real deskInnerFactor = std::pow(2.0, -5)) {
    std::vector<SnapshotDiagnostics> out;
    const Lattice& lat = snaps.lat();
    std::vector<real> radius(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) radius[i] = lat.coord(i).norm();
    for (std::size_t k = 0; k < snaps.count(); ++k) {
        SnapshotDiagnostics d;
        d.t = snaps.times[k];
        const GridFunction& u = snaps.frames[k];
        d.l2 = u.l2();
        d.linf = u.linf();
        real scale = std::abs(d.t - s) + std::pow(2.0, j);
        real rInPaper = std::pow(2.0, -10) * scale;
        real rInDesk = deskInnerFactor * scale;
        real rOut = std::pow(2.0, 10) * scale;
        real inP = 0, inD = 0, outP = 0, tot = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            real m = std::norm(u.v[i]);
            tot += m;
            if (radius[i] < rInPaper) inP += m;
            if (radius[i] < rInDesk) inD += m;
            if (radius[i] > rOut) outP += m * (1 + sq(radius[i]));
        }
        if (tot > 0) {
            d.innerMassPaper = inP / tot;
            d.innerMassDesk = inD / tot;
            d.outerMassPaper = outP / tot;
        }
        {
            GridFunction fh = toSpectrum(u);
            real lo = 0, hi = 0, t2 = 0;
            for (std::size_t i = 0; i < fh.size(); ++i) {
                real m = std::norm(fh.v[i]);
                real r = fh.lat.freq(i).norm();
                t2 += m;
                lo += m * lpWindowBelow(r, -5);  // S_{<-5} mass
                hi += m * dyadicStep(r, 5);      // S_{>5} mass
            }
            d.freqTailLow = t2 > 0 ? lo / t2 : 0;
            d.freqTailHigh = t2 > 0 ? hi / t2 : 0;
        }
        if (b) {
            GridFunction bu = applyDampingSector(*b, u, d.t);
            d.dampedMass = d.l2 > 0 ? bu.l2() / d.l2 : 0;
        }
        if (dataL1 > 0) d.dispersive = d.linf / dataL1;
        out.push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// full-wave parametrix pieces

// K_01 g (t) = -1/2 int e^{-|t - sigma|} g(sigma) dsigma over a time series
inline SpaceTimeField applyK01(const SpaceTimeField& g) {
    SpaceTimeField out;
    out.times = g.times;
    for (std::size_t k = 0; k < g.count(); ++k) {
        GridFunction acc(g.lat());
        for (std::size_t l = 0; l < g.count(); ++l) {
            real dtL = l == 0 ? 0 : g.times[l] - g.times[l - 1];
            real dtR = l + 1 == g.count() ? 0 : g.times[l + 1] - g.times[l];
            real w = 0.5 * (dtL + dtR);
            real ker = -0.5 * std::exp(-std::abs(g.times[k] - g.times[l]));
            for (std::size_t i = 0; i < acc.size(); ++i) acc.v[i] += ker * w * g.frames[l].v[i];
        }
        out.frames.push_back(std::move(acc));
    }
    return out;
}

}  // namespace outwave
