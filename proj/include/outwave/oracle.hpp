// Direct reference solver for P u = f: leapfrog in time with spectral spatial
// derivatives and 2/3-rule dealiasing on coefficient products. The staggered
// discrete energy is conserved to roundoff for time-independent a, b = c = 0,
// which is what the conservation audits check. Also the exact flat-wave
// Fourier propagators and log-log decay fitting.
#pragma once

#include "metric.hpp"
#include "fft.hpp"

namespace outwave {

struct WaveOptions {
    real dt = 0.2;
    std::vector<real> snapshotTimes;
    real auditEvery = 1.0;
    real driftError = 1e-3;  // instability detector on the staggered energy
    bool dealias = true;
};

struct WaveRun {
    SpaceTimeField u;
    SpaceTimeField ut;  // centered time derivative at snapshot times
    std::vector<real> auditTimes, energy;  // staggered discrete energy
    real cfl = 0;
};

namespace detail {

inline void dealiasMask(GridFunction& g) {
    real cut = g.lat.nyquist() * 2.0 / 3.0;
    applyMultiplierSpectral(g, [cut](const Vec& xi) {
        for (int a = 0; a < xi.n; ++a)
            if (std::abs(xi[a]) > cut) return 0.0;
        return 1.0;
    });
}

}  // namespace detail

template <class SourceFn>
inline WaveRun solveWave(const MetricField& m, const GridFunction& u0, const GridFunction& u1,
                         SourceFn&& f, real T, WaveOptions opt = {}) {
    if (!m.normalForm) throw std::invalid_argument("solveWave: metric not in normal form");
    const Lattice& lat = u0.lat;
    const int n = lat.n;

    // coefficient fields (time-independent fast path)
    bool timeDep = m.preset.find("time_oscillating") != std::string::npos;
    auto sampleCoeffs = [&](real t) {
        std::vector<GridFunction> aij;  // row-major spatial block
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                aij.push_back(GridFunction::sample(lat, [&](const Vec& x) { return m.a(i, j, t, x); }));
        return aij;
    };
    auto aij = sampleCoeffs(0.0);

    // CFL: dt <= 0.4 dx / sqrt(max eigenvalue of a^{ij})
    real maxEig = 0;
    for (std::size_t q = 0; q < lat.size(); q += 37) {
        Mat S(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) S(i, j) = aij[std::size_t(i) * n + j].v[q].real();
        maxEig = std::max(maxEig, symEigenvalues(S).back());
    }
    real cfl = 0.4 * lat.h() / std::sqrt(maxEig);
    if (opt.dt > cfl * (1 + 1e-9)) throw std::invalid_argument("solveWave: CFL violation");

    bool lowerOrder = false;
    {
        Vec probe(n);
        probe[0] = m.params.count("R") ? m.params.at("R") : 4.0;
        if (std::abs(m.b(0, 0.0, probe)) > 0 || std::abs(m.c(0.0, probe)) > 0) lowerOrder = true;
    }
    std::vector<GridFunction> bf;  // b^alpha fields
    GridFunction cf(lat);
    if (lowerOrder) {
        for (int al = 0; al <= n; ++al)
            bf.push_back(GridFunction::sample(lat, [&](const Vec& x) { return m.b(al, 0.0, x); }));
        cf = GridFunction::sample(lat, [&](const Vec& x) { return cplx(m.c(0.0, x)); });
    }

    // spatial operator A u = d_i (a^{ij} d_j u), dealiased
    auto applyA = [&](const GridFunction& u, real t) {
        if (timeDep) aij = sampleCoeffs(t);
        GridFunction uh = toSpectrum(u);
        if (opt.dealias) detail::dealiasMask(uh);
        std::vector<GridFunction> grads;
        for (int a = 0; a < n; ++a) {
            GridFunction d = uh;
            for (std::size_t i = 0; i < d.size(); ++i) d.v[i] *= cplx(0, d.lat.freq(i)[a]);
            fftInverse(d);
            grads.push_back(std::move(d));
        }
        GridFunction divh(lat);
        for (int i = 0; i < n; ++i) {
            GridFunction vi(lat);
            for (std::size_t q = 0; q < vi.size(); ++q) {
                cplx acc = 0;
                for (int j = 0; j < n; ++j) acc += aij[std::size_t(i) * n + j].v[q] * grads[j].v[q];
                vi.v[q] = acc;
            }
            fftForward(vi);
            if (opt.dealias) detail::dealiasMask(vi);
            for (std::size_t q = 0; q < vi.size(); ++q)
                divh.v[q] += cplx(0, lat.freq(q)[i]) * vi.v[q];
        }
        fftInverse(divh);
        return divh;
    };

    // leapfrog: u^{k+1} = 2u^k - u^{k-1} + dt^2 (A u^k + f - lower order)
    const real dt = opt.dt;
    int steps = int(std::round(T / dt));
    GridFunction uPrev = u0;
    GridFunction uCur = u0;
    {
        GridFunction acc = applyA(u0, 0.0);
        acc += f(0.0, lat);
        for (std::size_t q = 0; q < uCur.size(); ++q)
            uCur.v[q] = u0.v[q] + dt * u1.v[q] + 0.5 * dt * dt * acc.v[q];
    }

    WaveRun run;
    run.cfl = cfl;
    auto gradForm = [&](const GridFunction& a, const GridFunction& b2) {
        // Re <a^{ij} d_j a, d_i b2>
        auto ga = gradient(a), gb = gradient(b2);
        cplx acc = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (std::size_t q = 0; q < a.size(); ++q)
                    acc += aij[std::size_t(i) * n + j].v[q] * ga[j].v[q] * std::conj(gb[i].v[q]);
        return acc.real() * lat.cellVolume();
    };
    auto recordEnergy = [&](real tMid) {
        real kinetic = 0;
        for (std::size_t q = 0; q < uCur.size(); ++q) kinetic += std::norm(uCur.v[q] - uPrev.v[q]);
        kinetic = 0.5 * kinetic * lat.cellVolume() / (dt * dt);
        real potential = 0.5 * gradForm(uCur, uPrev);
        run.auditTimes.push_back(tMid);
        run.energy.push_back(kinetic + potential);
    };

    std::vector<real> snaps = opt.snapshotTimes;
    std::sort(snaps.begin(), snaps.end());
    std::size_t nextSnap = 0;
    auto maybeSnap = [&](real t, const GridFunction& uNext) {
        while (nextSnap < snaps.size() && snaps[nextSnap] <= t + 1e-9) {
            run.u.times.push_back(t);
            run.u.frames.push_back(uCur);
            GridFunction dtu(lat);
            for (std::size_t q = 0; q < dtu.size(); ++q)
                dtu.v[q] = (uNext.v[q] - uPrev.v[q]) / (2 * dt);
            run.ut.times.push_back(t);
            run.ut.frames.push_back(std::move(dtu));
            ++nextSnap;
        }
    };

    recordEnergy(0.5 * dt);
    real lastAudit = 0;
    real e0 = run.energy.front();
    for (int k = 1; k <= steps; ++k) {
        real t = k * dt;  // time of uCur
        GridFunction acc = applyA(uCur, t);
        acc += f(t, lat);
        if (lowerOrder) {
            // b^alpha D_alpha u + c u with D = d/i; time part lagged one level
            const cplx mi(0, -1);
            auto gu = gradient(uCur);
            for (std::size_t q = 0; q < acc.size(); ++q) {
                cplx low = cf.v[q] * uCur.v[q];
                low += bf[0].v[q] * mi * (uCur.v[q] - uPrev.v[q]) / dt;
                for (int j = 1; j <= n; ++j) low += bf[j].v[q] * mi * gu[j - 1].v[q];
                acc.v[q] -= low;
            }
        }
        GridFunction uNext(lat);
        for (std::size_t q = 0; q < uNext.size(); ++q)
            uNext.v[q] = 2.0 * uCur.v[q] - uPrev.v[q] + dt * dt * acc.v[q];
        maybeSnap(t, uNext);
        uPrev = uCur;
        uCur = uNext;
        if (t - lastAudit >= opt.auditEvery - 1e-9) {
            recordEnergy(t + 0.5 * dt);
            lastAudit = t;
            if (!lowerOrder && !timeDep && std::abs(run.energy.back() - e0) > opt.driftError * e0)
                throw std::runtime_error("solveWave: energy drift exceeds the instability bound");
        }
    }
    return run;
}

enum class FlatBranch { HalfWavePlus, HalfWaveMinus, FullWaveSine, FullWaveCosine };

inline GridFunction flatPropagator(const GridFunction& u, real t, FlatBranch branch) {
    GridFunction v = u;
    applyMultiplier(v, [&](const Vec& xi) -> cplx {
        real r = xi.norm();
        switch (branch) {
            case FlatBranch::HalfWavePlus: return std::exp(cplx(0, -t * r));
            case FlatBranch::HalfWaveMinus: return std::exp(cplx(0, t * r));
            case FlatBranch::FullWaveSine: return r < 1e-14 ? t : std::sin(t * r) / r;
            case FlatBranch::FullWaveCosine: return std::cos(t * r);
        }
        return 0.0;
    });
    return v;
}

struct DecayFit {
    real slope = 0;
    real stderr_ = 0;
    int points = 0;
};

inline DecayFit fitDecay(const std::vector<real>& t, const std::vector<real>& value, real tLo,
                         real tHi) {
    real sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < tLo || t[i] > tHi) continue;
        if (!(value[i] > 0)) throw std::invalid_argument("fitDecay: nonpositive value");
        real X = std::log(t[i]), Y = std::log(value[i]);
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
        ++n;
    }
    if (n < 6) throw std::invalid_argument("fitDecay: need at least 6 points");
    DecayFit fit;
    fit.points = n;
    real den = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / den;
    real meanX = sx / n, meanY = sy / n;
    real ss = 0, sxx0 = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < tLo || t[i] > tHi) continue;
        real X = std::log(t[i]), Y = std::log(value[i]);
        real r = Y - (meanY + fit.slope * (X - meanX));
        ss += r * r;
        sxx0 += sq(X - meanX);
    }
    fit.stderr_ = std::sqrt(ss / std::max(1, n - 2) / sxx0);
    return fit;
}

inline GridFunction zeroSource(real, const Lattice& lat) { return GridFunction(lat); }

}  // namespace outwave
