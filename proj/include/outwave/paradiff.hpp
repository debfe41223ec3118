// Paradifferential mollification of coefficients at frequency scale k:
//   a_(k) = delta + sum_{l < k-4} (S_{<l} chi_{<k-2l}) S_l a,
// evaluated on a periodic lattice. Terms whose spatial window equals 1 on the
// whole box collapse into a single low-pass S_{<l1+1}; the remaining l's get
// smoothed spatial windows. The l sum is truncated at the lattice-resolvable
// top and the discarded high-frequency part is recorded, not extrapolated.
#pragma once

#include <deque>

#include "lp.hpp"
#include "metric.hpp"

namespace outwave {

struct MollifyReport {
    int lUniform = 0;      // top l folded into the plain low-pass
    int lTop = 0;          // last l actually summed
    real truncationTail = 0;  // sup |f - S_{<k-4} f| over entries (discarded part)
};

namespace detail {

// spatial window S_{<l}[chi_{<j}] as a lattice field
inline GridFunction smoothedChiBelow(const Lattice& lat, int l, int j) {
    GridFunction w = GridFunction::sample(
        lat, [j](const Vec& x) { return lpWindowBelow(x.norm(), j); });
    applyMultiplier(w, [l](const Vec& xi) { return lpWindowBelow(xi.norm(), l); });
    return w;
}

}  // namespace detail

// mollify a perturbation field f (coefficient minus its flat value)
inline GridFunction mollifyField(const GridFunction& f, int k, MollifyReport* rep = nullptr) {
    const Lattice& lat = f.lat;
    real maxR = lat.L * std::sqrt(real(lat.n)) / 2;
    // chi_{<k-2l} == 1 on the box iff 2^{k-2l-1} >= maxR
    int lUniform = int(std::floor((k - 1 - std::log2(maxR)) / 2.0));
    int lTop = std::min(k - 5, lpFreqMax(lat));
    GridFunction fh = toSpectrum(f);

    GridFunction out(lat);
    {
        GridFunction low = fh;
        int cut = std::min(lUniform + 1, lTop + 1);
        applyMultiplierSpectral(low, [cut](const Vec& xi) { return lpWindowBelow(xi.norm(), cut); });
        fftInverse(low);
        out = low;
    }
    for (int l = lUniform + 1; l <= lTop; ++l) {
        GridFunction piece = fh;
        applySkSpectral(piece, l);
        fftInverse(piece);
        GridFunction w = detail::smoothedChiBelow(lat, l, k - 2 * l);
        for (std::size_t i = 0; i < piece.size(); ++i) out.v[i] += w.v[i] * piece.v[i];
    }
    if (rep) {
        rep->lUniform = lUniform;
        rep->lTop = lTop;
        GridFunction high = fh;
        applyMultiplierSpectral(high, [lTop](const Vec& xi) {
            return 1.0 - lpWindowBelow(xi.norm(), lTop + 1);
        });
        fftInverse(high);
        rep->truncationTail = std::max(rep->truncationTail, high.linf());
    }
    return out;
}

// Mollified coefficients of the principal part on a fixed lattice, with a
// small per-time cache. Entries are indexed (i, beta), i = 1..n, beta = 0..n.
class MollifiedCoeff {
  public:
    MollifiedCoeff(const MetricField& m, int k, const Lattice& lat)
        : metric_(m), k_(k), lat_(lat) {
        if (!m.normalForm) throw std::invalid_argument("MollifiedCoeff: metric not in normal form");
        if (k < lpFreqMin(lat) || k > lpFreqMax(lat))
            throw std::invalid_argument("MollifiedCoeff: k outside resolvable range");
    }

    int k() const { return k_; }
    const Lattice& lattice() const { return lat_; }
    const MetricField& metric() const { return metric_; }
    const MollifyReport& report() const { return report_; }

    // lattice field of a^{i beta}_(k) - delta^{i beta}
    const GridFunction& perturbation(int i, int beta, real t) const {
        auto& slot = cacheFor(t);
        int idx = (i - 1) * (metric_.n + 1) + beta;
        if (!slot.fields[idx]) {
            GridFunction raw = GridFunction::sample(lat_, [&](const Vec& x) {
                return metric_.a(i, beta, t, x) - minkowskiEntry(i, beta);
            });
            slot.fields[idx] = std::make_unique<GridFunction>(
                mollifyField(raw, k_, &report_));
        }
        return *slot.fields[idx];
    }

  private:
    struct Slot {
        real t;
        std::vector<std::unique_ptr<GridFunction>> fields;
    };
    Slot& cacheFor(real t) const {
        for (auto& s : cache_)
            if (s.t == t) return s;
        cache_.push_back(Slot{t, {}});
        cache_.back().fields.resize(std::size_t(metric_.n) * (metric_.n + 1));
        if (cache_.size() > 12) cache_.pop_front();
        return cache_.back();
    }

    MetricField metric_;
    int k_;
    Lattice lat_;
    mutable std::deque<Slot> cache_;
    mutable MollifyReport report_;
};

// P_(k) u = d_t^2 u - 2 d_i(a^{i0} d_t u) - d_i(a^{ij} d_j u), spectral in x,
// 4th order centered differences in t. Input frames must be uniformly spaced;
// the output keeps the interior frames (two trimmed at each end).
inline SpaceTimeField applyPk(const SpaceTimeField& u, const MollifiedCoeff& mc) {
    const Lattice& lat = u.lat();
    if (!(lat == mc.lattice())) throw std::invalid_argument("applyPk: mismatched lattices");
    const int n = lat.n;
    std::size_t F = u.count();
    if (F < 5) throw std::invalid_argument("applyPk: need at least 5 frames");
    real dt = u.times[1] - u.times[0];
    for (std::size_t f = 1; f < F; ++f)
        if (std::abs(u.times[f] - u.times[f - 1] - dt) > 1e-10 * dt)
            throw std::invalid_argument("applyPk: frames not uniformly spaced");

    SpaceTimeField out;
    for (std::size_t f = 2; f + 2 < F; ++f) {
        real t = u.times[f];
        // 4th order second time derivative
        GridFunction dtt(lat);
        for (std::size_t i = 0; i < dtt.size(); ++i)
            dtt.v[i] = (-u.frames[f - 2].v[i] + 16.0 * u.frames[f - 1].v[i] - 30.0 * u.frames[f].v[i] +
                        16.0 * u.frames[f + 1].v[i] - u.frames[f + 2].v[i]) /
                       (12.0 * dt * dt);
        // 4th order first time derivative
        GridFunction dtu(lat);
        for (std::size_t i = 0; i < dtu.size(); ++i)
            dtu.v[i] = (u.frames[f - 2].v[i] - 8.0 * u.frames[f - 1].v[i] +
                        8.0 * u.frames[f + 1].v[i] - u.frames[f + 2].v[i]) /
                       (12.0 * dt);

        auto grads = gradient(u.frames[f]);
        // v_i = a^{ij} d_j u + 2 a^{i0} d_t u (perturbation + flat parts)
        std::vector<GridFunction> vi;
        vi.reserve(n);
        for (int i = 1; i <= n; ++i) {
            GridFunction w = grads[i - 1];  // flat part: delta^{ij} d_j u
            for (int j = 1; j <= n; ++j) {
                const GridFunction& p = mc.perturbation(i, j, t);
                for (std::size_t q = 0; q < w.size(); ++q) w.v[q] += p.v[q] * grads[j - 1].v[q];
            }
            const GridFunction& p0 = mc.perturbation(i, 0, t);
            for (std::size_t q = 0; q < w.size(); ++q) w.v[q] += 2.0 * p0.v[q] * dtu.v[q];
            vi.push_back(std::move(w));
        }
        GridFunction div(lat);
        for (int i = 0; i < n; ++i) {
            GridFunction d = spectralDerivative(vi[i], i);
            div += d;
        }
        GridFunction res = dtt;
        res -= div;
        out.times.push_back(t);
        out.frames.push_back(std::move(res));
    }
    return out;
}

// same operator built from the raw (unmollified) coefficients
inline SpaceTimeField applyPrincipalRaw(const SpaceTimeField& u, const MetricField& m) {
    const Lattice& lat = u.lat();
    const int n = lat.n;
    std::size_t F = u.count();
    if (F < 5) throw std::invalid_argument("applyPrincipalRaw: need at least 5 frames");
    real dt = u.times[1] - u.times[0];
    SpaceTimeField out;
    for (std::size_t f = 2; f + 2 < F; ++f) {
        real t = u.times[f];
        GridFunction dtt(lat), dtu(lat);
        for (std::size_t i = 0; i < dtt.size(); ++i) {
            dtt.v[i] = (-u.frames[f - 2].v[i] + 16.0 * u.frames[f - 1].v[i] - 30.0 * u.frames[f].v[i] +
                        16.0 * u.frames[f + 1].v[i] - u.frames[f + 2].v[i]) /
                       (12.0 * dt * dt);
            dtu.v[i] = (u.frames[f - 2].v[i] - 8.0 * u.frames[f - 1].v[i] +
                        8.0 * u.frames[f + 1].v[i] - u.frames[f + 2].v[i]) /
                       (12.0 * dt);
        }
        auto grads = gradient(u.frames[f]);
        GridFunction div(lat);
        for (int i = 1; i <= n; ++i) {
            GridFunction w(lat);
            for (std::size_t q = 0; q < w.size(); ++q) {
                Vec x = lat.coord(q);
                cplx acc = 0;
                for (int j = 1; j <= n; ++j) acc += m.a(i, j, t, x) * grads[j - 1].v[q];
                acc += 2.0 * m.a(i, 0, t, x) * dtu.v[q];
                w.v[q] = acc;
            }
            div += spectralDerivative(w, i - 1);
        }
        GridFunction res = dtt;
        res -= div;
        out.times.push_back(t);
        out.frames.push_back(std::move(res));
    }
    return out;
}

}  // namespace outwave
