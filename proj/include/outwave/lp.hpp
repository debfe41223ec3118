// Littlewood-Paley decompositions: smooth dyadic frequency windows s_k and
// spatial windows chi_j, raised-cosine in log2 of the radius so that the
// partition of unity is exact by telescoping.
#pragma once

#include "fft.hpp"
#include "grid.hpp"

namespace outwave {

// half-octave transition: 0 below 2^a, 1 above 2^(a+1/2)
inline real dyadicStep(real r, real a) {
    if (r <= 0) return 0;
    return cosstep(2 * (std::log2(r) - a));
}

// s_j(r): supported in (2^(j-1), 2^(j+1/2)), plateau on [2^(j-1/2), 2^j],
// sum over j is 1 for r > 0 by telescoping
inline real lpWindow(real r, int j) { return dyadicStep(r, j - 1) - dyadicStep(r, j); }

// S_{<k}(r): 1 for r <= 2^(k-1), 0 for r >= 2^(k-1/2); equals 1 at r = 0
inline real lpWindowBelow(real r, int k) { return 1.0 - dyadicStep(r, k - 1); }

// sum of s_j for j in [a,b]: 1 on [2^(a-1/2), 2^b]
inline real lpWindowBand(real r, int a, int b) { return dyadicStep(r, a - 1) - dyadicStep(r, b); }

// resolvable frequency LP range on a lattice: 2pi/L <= 2^(k-1), 2^(k+1) <= pi N/L
inline int lpFreqMin(const Lattice& lat) { return int(std::ceil(std::log2(lat.freqStep()))) + 1; }
inline int lpFreqMax(const Lattice& lat) { return int(std::floor(std::log2(lat.nyquist()))) - 1; }

enum class ProjKind { FreqSk, FreqBelowK, SpatialChiJ, SpatialChiBelowJ };

inline GridFunction dyadicProject(const GridFunction& u, ProjKind kind, int index) {
    GridFunction out = u;
    switch (kind) {
        case ProjKind::FreqSk:
            if (index < lpFreqMin(u.lat) || index > lpFreqMax(u.lat))
                throw std::invalid_argument("dyadicProject: frequency index outside resolvable range");
            applyMultiplier(out, [index](const Vec& xi) { return lpWindow(xi.norm(), index); });
            break;
        case ProjKind::FreqBelowK:
            if (index < lpFreqMin(u.lat) || index > lpFreqMax(u.lat) + 1)
                throw std::invalid_argument("dyadicProject: frequency index outside resolvable range");
            applyMultiplier(out, [index](const Vec& xi) { return lpWindowBelow(xi.norm(), index); });
            break;
        case ProjKind::SpatialChiJ:
            for (std::size_t i = 0; i < out.size(); ++i) out.v[i] *= lpWindow(u.lat.coord(i).norm(), index);
            break;
        case ProjKind::SpatialChiBelowJ:
            for (std::size_t i = 0; i < out.size(); ++i)
                out.v[i] *= lpWindowBelow(u.lat.coord(i).norm(), index);
            break;
    }
    return out;
}

inline GridFunction freqProject(const GridFunction& u, int k) { return dyadicProject(u, ProjKind::FreqSk, k); }

// S_k applied spectrally in place
inline void applySkSpectral(GridFunction& fhat, int k) {
    applyMultiplierSpectral(fhat, [k](const Vec& xi) { return lpWindow(xi.norm(), k); });
}

// relative spectral mass of u outside the band 2^a <= |xi| <= 2^b
inline real freqTailMass(const GridFunction& u, int a, int b) {
    GridFunction fh = toSpectrum(u);
    real in = 0, out = 0;
    for (std::size_t i = 0; i < fh.size(); ++i) {
        real r = fh.lat.freq(i).norm();
        real m = std::norm(fh.v[i]);
        real w = lpWindowBand(r, a, b);
        in += m * w;
        out += m * (1 - w);
    }
    real tot = in + out;
    return tot > 0 ? out / tot : 0;
}

}  // namespace outwave
