// Periodic lattice descriptor and complex grid fields. Coordinates live in
// [-L/2, L/2)^n with N points per axis; frequencies are the signed DFT
// frequencies 2*pi*k/L, |k| <= N/2.
#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>

#include "common.hpp"

namespace outwave {

struct Lattice {
    int n = 1;
    int N = 0;
    real L = 0;

    real h() const { return L / N; }
    std::size_t size() const {
        std::size_t s = 1;
        for (int i = 0; i < n; ++i) s *= std::size_t(N);
        return s;
    }
    real cellVolume() const { real v = 1; for (int i = 0; i < n; ++i) v *= h(); return v; }
    real nyquist() const { return pi / h(); }
    real freqStep() const { return 2 * pi / L; }

    bool operator==(const Lattice& o) const { return n == o.n && N == o.N && L == o.L; }

    // decode flat index -> per-axis indices (row-major, axis 0 slowest)
    void decode(std::size_t idx, int* out) const {
        for (int a = n - 1; a >= 0; --a) { out[a] = int(idx % N); idx /= N; }
    }
    std::size_t encode(const int* in) const {
        std::size_t idx = 0;
        for (int a = 0; a < n; ++a) idx = idx * N + std::size_t(in[a]);
        return idx;
    }

    Vec coord(std::size_t idx) const {
        int ix[3];
        decode(idx, ix);
        Vec x(n);
        for (int a = 0; a < n; ++a) x[a] = -L / 2 + ix[a] * h();
        return x;
    }
    // signed frequency of DFT bin
    Vec freq(std::size_t idx) const {
        int ix[3];
        decode(idx, ix);
        Vec xi(n);
        for (int a = 0; a < n; ++a) {
            int k = ix[a] <= N / 2 ? ix[a] : ix[a] - N;
            if (ix[a] == N / 2) k = -N / 2;  // convention: Nyquist bin negative
            xi[a] = freqStep() * k;
        }
        return xi;
    }
};

struct GridFunction {
    Lattice lat;
    std::vector<cplx> v;

    GridFunction() = default;
    explicit GridFunction(const Lattice& l) : lat(l), v(l.size(), cplx(0)) {}

    std::size_t size() const { return v.size(); }
    cplx& operator[](std::size_t i) { return v[i]; }
    cplx operator[](std::size_t i) const { return v[i]; }

    real l2() const {
        real s = 0;
        for (const auto& z : v) s += std::norm(z);
        return std::sqrt(s * lat.cellVolume());
    }
    real linf() const {
        real s = 0;
        for (const auto& z : v) s = std::max(s, std::abs(z));
        return s;
    }
    real l1() const {
        real s = 0;
        for (const auto& z : v) s += std::abs(z);
        return s * lat.cellVolume();
    }
    bool finite() const {
        for (const auto& z : v)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    GridFunction& operator+=(const GridFunction& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
        return *this;
    }
    GridFunction& operator*=(cplx s) {
        for (auto& z : v) z *= s;
        return *this;
    }

    template <class F>
    static GridFunction sample(const Lattice& l, F&& f) {
        GridFunction g(l);
        for (std::size_t i = 0; i < g.size(); ++i) g.v[i] = f(l.coord(i));
        return g;
    }
};

// L2 inner product <u,v> = integral u conj(v)
inline cplx inner(const GridFunction& u, const GridFunction& w) {
    cplx s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u.v[i] * std::conj(w.v[i]);
    return s * u.lat.cellVolume();
}

// Time series of spatial fields; frames need not be uniformly spaced.
struct SpaceTimeField {
    std::vector<real> times;
    std::vector<GridFunction> frames;

    std::size_t count() const { return frames.size(); }
    const Lattice& lat() const { return frames.at(0).lat; }
};

}  // namespace outwave
