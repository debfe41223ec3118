// Lattice bookkeeping, FFT round trips, Parseval, spectral derivatives,
// and the Littlewood-Paley partition properties.
#include <catch2/catch_amalgamated.hpp>

#include "outwave/fft.hpp"
#include "outwave/lp.hpp"
#include "outwave/rng.hpp"

using namespace outwave;

static GridFunction randomBandLimited(const Lattice& lat, CounterRng& rng, real kLo, real kHi) {
    GridFunction f(lat);
    for (std::size_t i = 0; i < f.size(); ++i) {
        real r = lat.freq(i).norm();
        if (r >= kLo && r <= kHi) f.v[i] = cplx(rng.normal(), rng.normal());
    }
    fftInverse(f);
    return f;
}

TEST_CASE("fft round trip and Parseval") {
    Lattice lat{2, 64, 32.0};
    CounterRng rng(7);
    GridFunction u(lat);
    for (auto& z : u.v) z = cplx(rng.normal(), rng.normal());
    GridFunction fh = toSpectrum(u);
    GridFunction back = fromSpectrum(fh);
    real err = 0;
    for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(u.v[i] - back.v[i]));
    REQUIRE(err < 1e-12);
    REQUIRE(std::abs(u.l2() - spectrumL2(fh)) < 1e-10 * u.l2());
}

TEST_CASE("spectral derivative of a plane wave") {
    Lattice lat{1, 128, 16.0};
    real k = 2 * pi / lat.L * 5;
    GridFunction u = GridFunction::sample(lat, [&](const Vec& x) { return std::exp(cplx(0, k * x[0])); });
    GridFunction du = spectralDerivative(u, 0);
    real err = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        err = std::max(err, std::abs(du.v[i] - cplx(0, k) * u.v[i]));
    REQUIRE(err < 1e-10);
}

TEST_CASE("LP partition of unity on resolvable band") {
    Lattice lat{2, 128, 32.0};
    CounterRng rng(13);
    int kLo = lpFreqMin(lat), kHi = lpFreqMax(lat);
    REQUIRE(kHi - kLo >= 2);
    // band-limited inside the telescoped plateau [2^(kLo-1/2), 2^kHi]
    GridFunction v = randomBandLimited(lat, rng, std::pow(2.0, kLo - 0.4), std::pow(2.0, kHi));
    REQUIRE(v.l2() > 0);
    GridFunction sum2(lat);
    for (int k = kLo; k <= kHi; ++k) sum2 += freqProject(v, k);
    sum2 -= v;
    REQUIRE(sum2.l2() < 1e-8 * v.l2());
}

TEST_CASE("frequency projection leaves contained spectrum alone") {
    Lattice lat{2, 64, 32.0};
    CounterRng rng(5);
    GridFunction u = randomBandLimited(lat, rng, 0.72, 0.99);  // inside the s_0 plateau
    GridFunction p = freqProject(u, 0);
    p -= u;
    REQUIRE(p.l2() < 1e-10 * u.l2());
}

TEST_CASE("spatial chi_j partition sums to one in covered range") {
    Lattice lat{2, 64, 64.0};
    int jLo = -3, jHi = 4;
    for (real r : {0.3, 1.0, 2.5, 7.9, 12.0}) {
        real s = 0;
        for (int j = jLo; j <= jHi; ++j) s += lpWindow(r, j);
        real expect = lpWindowBand(r, jLo, jHi);
        REQUIRE(std::abs(s - expect) < 1e-12);
        if (r >= std::pow(2.0, jLo) && r <= std::pow(2.0, jHi)) REQUIRE(std::abs(s - 1.0) < 1e-10);
    }
}

TEST_CASE("S1 amplitude behavior on plane waves") {
    Lattice lat{1, 256, 64.0};
    real k = 1.3;
    // nearest lattice frequency to 1.3
    real dk = lat.freqStep();
    k = dk * std::round(k / dk);
    GridFunction u = GridFunction::sample(lat, [&](const Vec& x) { return std::exp(cplx(0, k * x[0])); });
    GridFunction s1 = freqProject(u, 1);
    real amp1 = s1.linf();
    REQUIRE(amp1 <= 1.0 + 1e-9);
    GridFunction s0 = freqProject(u, 0);
    s0 += s1;
    s0 -= u;
    REQUIRE(s0.l2() < 1e-10 * u.l2());
}
