// FFTW-backed transforms on GridFunction with a per-(n,N) plan cache, plus
// Fourier multiplier application and spectral derivatives. Forward transform
// is the plain DFT; inverse carries the 1/size normalization.
#pragma once

#include <fftw3.h>

#include <map>
#include <tuple>

#include "grid.hpp"

namespace outwave {

class FftPlans {
  public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    void execute(const Lattice& lat, std::vector<cplx>& data, int sign) {
        auto key = std::make_tuple(lat.n, lat.N, sign);
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            // Plan on a scratch buffer with FFTW_MEASURE, then reuse via
            // the new-array execute interface (alignment matches malloc).
            std::vector<cplx> scratch(lat.size());
            int dims[3] = {lat.N, lat.N, lat.N};
            fftw_plan p = fftw_plan_dft(
                lat.n, dims, reinterpret_cast<fftw_complex*>(scratch.data()),
                reinterpret_cast<fftw_complex*>(scratch.data()), sign, FFTW_MEASURE);
            it = plans_.emplace(key, p).first;
        }
        fftw_execute_dft(it->second, reinterpret_cast<fftw_complex*>(data.data()),
                         reinterpret_cast<fftw_complex*>(data.data()));
    }

  private:
    FftPlans() = default;
    ~FftPlans() {
        for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    }
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// in-place DFT of the value array (no normalization)
inline void fftForward(GridFunction& g) { FftPlans::instance().execute(g.lat, g.v, FFTW_FORWARD); }

// in-place inverse DFT with 1/size normalization
inline void fftInverse(GridFunction& g) {
    FftPlans::instance().execute(g.lat, g.v, FFTW_BACKWARD);
    real s = 1.0 / real(g.size());
    for (auto& z : g.v) z *= s;
}

inline GridFunction toSpectrum(const GridFunction& g) {
    GridFunction f = g;
    fftForward(f);
    return f;
}
inline GridFunction fromSpectrum(const GridFunction& f) {
    GridFunction g = f;
    fftInverse(g);
    return g;
}

// L2 norm computed on the frequency side (Parseval partner of GridFunction::l2)
inline real spectrumL2(const GridFunction& fhat) {
    real s = 0;
    for (const auto& z : fhat.v) s += std::norm(z);
    return std::sqrt(s * fhat.lat.cellVolume() / real(fhat.size()));
}

// u <- m(D) u for a scalar multiplier m(xi)
template <class F>
inline void applyMultiplier(GridFunction& g, F&& m) {
    fftForward(g);
    for (std::size_t i = 0; i < g.size(); ++i) g.v[i] *= m(g.lat.freq(i));
    fftInverse(g);
}

template <class F>
inline void applyMultiplierSpectral(GridFunction& fhat, F&& m) {
    for (std::size_t i = 0; i < fhat.size(); ++i) fhat.v[i] *= m(fhat.lat.freq(i));
}

// spectral partial derivative along axis
inline GridFunction spectralDerivative(const GridFunction& g, int axis) {
    GridFunction f = toSpectrum(g);
    for (std::size_t i = 0; i < f.size(); ++i) f.v[i] *= cplx(0, f.lat.freq(i)[axis]);
    fftInverse(f);
    return f;
}

// all first derivatives from one forward transform
inline std::vector<GridFunction> gradient(const GridFunction& g) {
    GridFunction fh = toSpectrum(g);
    std::vector<GridFunction> out;
    out.reserve(g.lat.n);
    for (int a = 0; a < g.lat.n; ++a) {
        GridFunction d = fh;
        for (std::size_t i = 0; i < d.size(); ++i) d.v[i] *= cplx(0, d.lat.freq(i)[a]);
        fftInverse(d);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace outwave
