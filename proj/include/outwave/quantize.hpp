// Discrete Weyl quantization (exact midpoint-kernel form in 1d, symmetrized
// separable form in any dimension), the Bargmann/FBI transform T_{1/s} with
// its adjoint (normalization calibrated on a reference Gaussian so T*T = I),
// the rescaled Cauchy-Riemann diagnostic, and coherent-state phase kernels.
#pragma once

#include "symbol.hpp"

namespace outwave {

// ---------------------------------------------------------------------------
// exact Weyl operator in one dimension via the midpoint kernel
//   K(x,y) = (1/L) sum_k a((x+y)/2, xi_k) e^{i(x-y) xi_k}
class Weyl1d {
  public:
    template <class SymFn>
    Weyl1d(const Lattice& lat, SymFn&& sym) : lat_(lat) {
        if (lat.n != 1) throw std::invalid_argument("Weyl1d: 1d lattices only");
        const int N = lat.N;
        table_.assign(std::size_t(2 * N - 1) * N, cplx(0));
        GridFunction row(lat);
        for (int m = 0; m < 2 * N - 1; ++m) {
            real mid = -lat.L / 2 + 0.5 * m * lat.h();
            for (int b = 0; b < N; ++b) row.v[b] = sym(mid, lat.freq(std::size_t(b))[0]);
            // F_m(d) = (1/L) sum_k a(mid, xi_k) e^{2 pi i k d / N}
            FftPlans::instance().execute(lat, row.v, FFTW_BACKWARD);
            for (int d = 0; d < N; ++d) table_[std::size_t(m) * N + d] = row.v[d] / lat.L;
        }
    }

    GridFunction apply(const GridFunction& u) const {
        const int N = lat_.N;
        GridFunction out(lat_);
        const real h = lat_.h();
        for (int i = 0; i < N; ++i) {
            cplx acc = 0;
            for (int j = 0; j < N; ++j) {
                int d = i - j;
                if (d < 0) d += N;
                acc += table_[std::size_t(i + j) * N + d] * u.v[j];
            }
            out.v[i] = acc * h;
        }
        return out;
    }

  private:
    Lattice lat_;
    std::vector<cplx> table_;
};

// ---------------------------------------------------------------------------
// symmetrized separable quantization sum_m (f_m g_m(D) + g_m(D) f_m)/2;
// exact Weyl of each product symbol modulo an S^(0)-order correction
inline GridFunction weylApplySeparable(const SymbolRep& a, const GridFunction& u, real t) {
    auto tb = a.tables(u.lat, t);
    GridFunction uh = toSpectrum(u);
    GridFunction accX(u.lat);   // sum f_m * (g_m(D) u)
    GridFunction accF(u.lat);   // spectral accumulator of g_m(D)(f_m u)
    for (std::size_t m = 0; m < tb.fx.size(); ++m) {
        GridFunction v = uh;
        for (std::size_t i = 0; i < v.size(); ++i) v.v[i] *= tb.gxi[m][i];
        fftInverse(v);
        for (std::size_t i = 0; i < v.size(); ++i) accX.v[i] += tb.fx[m].v[i] * v.v[i];
        GridFunction w = u;
        for (std::size_t i = 0; i < w.size(); ++i) w.v[i] *= tb.fx[m].v[i];
        fftForward(w);
        for (std::size_t i = 0; i < w.size(); ++i) accF.v[i] += tb.gxi[m][i] * w.v[i];
    }
    fftInverse(accF);
    GridFunction out(u.lat);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = 0.5 * (accX.v[i] + accF.v[i]);
    if (a.principalSign != 0) {
        GridFunction p = uh;
        applyMultiplierSpectral(p, [&](const Vec& xi) { return a.principalSign * xi.norm(); });
        fftInverse(p);
        out += p;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bargmann / FBI transform at scale s on a fixed spatial lattice. The xi axis
// is a uniform grid (product grid for n > 1) with spacing <= 1/(4 sqrt(s)).
struct PhaseGrid {
    Lattice xLat;
    real s = 1;
    real xiLo = -4, xiHi = 4;
    int nXi = 64;  // per axis

    real xiStep() const { return (xiHi - xiLo) / (nXi - 1); }
    real xiAt(int q) const { return xiLo + q * xiStep(); }
    std::size_t sliceCount() const {
        std::size_t c = 1;
        for (int a = 0; a < xLat.n; ++a) c *= std::size_t(nXi);
        return c;
    }
    Vec xiOf(std::size_t flat) const {
        Vec xi(xLat.n);
        for (int a = xLat.n - 1; a >= 0; --a) {
            xi[a] = xiAt(int(flat % nXi));
            flat /= nXi;
        }
        return xi;
    }
};

struct PhaseField {
    PhaseGrid grid;
    std::vector<GridFunction> slices;  // one spatial field per xi grid point

    real l2() const {
        real acc = 0;
        for (const auto& s : slices) acc += sq(s.l2());
        real w = 1;
        for (int a = 0; a < grid.xLat.n; ++a) w *= grid.xiStep();
        return std::sqrt(acc * w);
    }
    // peak magnitude and its phase-space location
    real peak(Vec* xAt = nullptr, Vec* xiAt = nullptr) const {
        real best = 0;
        for (std::size_t q = 0; q < slices.size(); ++q)
            for (std::size_t i = 0; i < slices[q].size(); ++i) {
                real m = std::abs(slices[q].v[i]);
                if (m > best) {
                    best = m;
                    if (xAt) *xAt = grid.xLat.coord(i);
                    if (xiAt) *xiAt = grid.xiOf(q);
                }
            }
        return best;
    }
};

class Bargmann {
  public:
    static PhaseGrid defaultGrid(const Lattice& lat, real s, real band = 3.0) {
        PhaseGrid g;
        g.xLat = lat;
        g.s = s;
        real margin = 6.0 / std::sqrt(s);
        g.xiLo = -band - margin;
        g.xiHi = band + margin;
        real step = 1.0 / (4.0 * std::sqrt(s));
        g.nXi = int(std::ceil((g.xiHi - g.xiLo) / step)) + 1;
        return g;
    }

    explicit Bargmann(const PhaseGrid& grid) : grid_(grid) {
        if (grid.xLat.h() > std::sqrt(grid.s) / 4 * (1 + 1e-9))
            throw std::invalid_argument("Bargmann: spatial lattice coarser than sqrt(s)/4");
        calibrate();
    }

    const PhaseGrid& grid() const { return grid_; }
    real constant() const { return c_; }

    PhaseField forward(const GridFunction& u) const {
        PhaseField out;
        out.grid = grid_;
        GridFunction uh = toSpectrum(u);
        out.slices.reserve(grid_.sliceCount());
        const real s = grid_.s;
        const real gauss = std::pow(2 * pi * s, grid_.xLat.n / 2.0);
        for (std::size_t q = 0; q < grid_.sliceCount(); ++q) {
            Vec xi = grid_.xiOf(q);
            GridFunction slice = uh;
            for (std::size_t i = 0; i < slice.size(); ++i) {
                Vec eta = slice.lat.freq(i);
                Vec d = eta - xi;
                slice.v[i] *= c_ * gauss * std::exp(-s * d.norm2() / 2);
            }
            fftInverse(slice);
            out.slices.push_back(std::move(slice));
        }
        return out;
    }

    GridFunction adjoint(const PhaseField& F) const {
        const real s = grid_.s;
        const real gauss = std::pow(2 * pi * s, grid_.xLat.n / 2.0);
        GridFunction acc(grid_.xLat);  // spectral accumulator
        for (std::size_t q = 0; q < F.slices.size(); ++q) {
            Vec xi = grid_.xiOf(q);
            GridFunction sh = toSpectrum(F.slices[q]);
            for (std::size_t i = 0; i < sh.size(); ++i) {
                Vec eta = sh.lat.freq(i);
                Vec d = eta - xi;
                acc.v[i] += sh.v[i] * c_ * gauss * std::exp(-s * d.norm2() / 2);
            }
        }
        real w = 1;
        for (int a = 0; a < grid_.xLat.n; ++a) w *= grid_.xiStep();
        fftInverse(acc);
        acc *= w;
        return acc;
    }

    // coherent state T*_{1/s} delta_{(y,eta)} = c s^{-n/4} e^{-(x-y)^2/(2s)} e^{i eta x}
    GridFunction coherentState(const Vec& y, const Vec& eta) const {
        const real s = grid_.s;
        const int n = grid_.xLat.n;
        real amp = c_ * std::pow(s, -n / 4.0);
        return GridFunction::sample(grid_.xLat, [&](const Vec& x) {
            Vec d = x - y;
            return amp * std::exp(cplx(-d.norm2() / (2 * s), eta.dot(x)));
        });
    }

  private:
    void calibrate() {
        c_ = 1.0;
        const real s = grid_.s;
        GridFunction g = GridFunction::sample(grid_.xLat, [&](const Vec& x) {
            return std::exp(-x.norm2() / (2.5 * s));
        });
        real ref = g.l2();
        PhaseField F = forward(g);
        c_ = ref / F.l2();
    }

    PhaseGrid grid_;
    real c_ = 1;
};

// rescaled Cauchy-Riemann residual |(i/s) d_xi T - (d_x - i xi) T| / |T| (1d)
inline real cauchyRiemannResidual(const PhaseField& F) {
    const PhaseGrid& g = F.grid;
    if (g.xLat.n != 1) throw std::invalid_argument("cauchyRiemannResidual: 1d only");
    const real s = g.s;
    const real dxi = g.xiStep();
    // 6th order centered stencil in xi
    const real w1 = 3.0 / 4, w2 = -3.0 / 20, w3 = 1.0 / 60;
    real num = 0, den = 0;
    for (int q = 3; q + 3 < g.nXi; ++q) {
        real xi = g.xiAt(q);
        GridFunction dX = spectralDerivative(F.slices[q], 0);
        for (std::size_t i = 0; i < dX.size(); ++i) {
            cplx dXi = (w1 * (F.slices[q + 1].v[i] - F.slices[q - 1].v[i]) +
                        w2 * (F.slices[q + 2].v[i] - F.slices[q - 2].v[i]) +
                        w3 * (F.slices[q + 3].v[i] - F.slices[q - 3].v[i])) /
                       dxi;
            cplx lhs = cplx(0, 1) / s * dXi;
            cplx rhs = dX.v[i] - cplx(0, xi) * F.slices[q].v[i];
            num += std::norm(lhs - rhs);
            den += std::norm(F.slices[q].v[i]);
        }
    }
    return std::sqrt(num / den);
}

// rescaled phase-space distance of Section "pdo": d_s^2 = |x-y|^2/s + s|xi-eta|^2
inline real phaseDistance(real s, const Vec& x, const Vec& xi, const Vec& y, const Vec& eta) {
    return std::sqrt((x - y).norm2() / s + s * (xi - eta).norm2());
}

// kernel column of T_{1/t} S(t,s) T^*_{1/s} at probe (y, eta): evolve the
// coherent state and transform at the output scale
template <class Evolve>
inline PhaseField phaseKernelProbe(Evolve&& evolve, real s, real t, const Vec& y, const Vec& eta,
                                   const Lattice& lat, real band = 3.0) {
    Bargmann Tin(Bargmann::defaultGrid(lat, s, band));
    GridFunction probe = Tin.coherentState(y, eta);
    GridFunction evolved = evolve(probe, s, t);
    Bargmann Tout(Bargmann::defaultGrid(lat, t, band));
    return Tout.forward(evolved);
}

// Least-squares decay exponent p of |K|/peak ~ (1 + d)^{-p} within a distance
// window. The distance is measured from the Hamilton flow graph: for each
// output slice xi the center is the endpoint x_t of the trajectory reaching
// that slice, and the xi-offset is charged at the input scale,
//   d^2 = |x - xEnd(xi)|^2 / t + sIn |xi - etaIn|^2.
template <class XEndFn>
inline real fitOffFlowDecay(const PhaseField& K, real tScale, real sIn, const Vec& etaIn,
                            XEndFn&& xEnd, real dMin, real dMax) {
    real peak = 0;
    for (const auto& s : K.slices)
        for (const auto& z : s.v) peak = std::max(peak, std::abs(z));
    real sxx = 0, sxy = 0, sx = 0, sy = 0;
    int cnt = 0;
    // bin by distance and fit on bin maxima (envelope fit)
    const int bins = 48;
    std::vector<real> binMax(bins, 0);
    for (std::size_t q = 0; q < K.slices.size(); ++q) {
        Vec xi = K.grid.xiOf(q);
        Vec xc = xEnd(xi);
        real dxi2 = sIn * (xi - etaIn).norm2();
        for (std::size_t i = 0; i < K.slices[q].size(); ++i) {
            real d = std::sqrt((K.grid.xLat.coord(i) - xc).norm2() / tScale + dxi2);
            if (d < dMin || d > dMax) continue;
            int b = int((d - dMin) / (dMax - dMin) * bins);
            b = std::clamp(b, 0, bins - 1);
            binMax[b] = std::max(binMax[b], std::abs(K.slices[q].v[i]));
        }
    }
    for (int b = 0; b < bins; ++b) {
        if (binMax[b] <= 0) continue;
        real d = dMin + (b + 0.5) * (dMax - dMin) / bins;
        real X = std::log(1 + d), Y = std::log(binMax[b] / peak);
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
        ++cnt;
    }
    if (cnt < 4) throw std::runtime_error("fitOffFlowDecay: not enough bins");
    real slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return -slope;
}

}  // namespace outwave
