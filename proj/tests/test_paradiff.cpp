// Coefficient mollification bounds and the mollified principal operator.
#include <catch2/catch_amalgamated.hpp>

#include "outwave/norms.hpp"
#include "outwave/paradiff.hpp"
#include "outwave/profile.hpp"
#include "outwave/rng.hpp"

using namespace outwave;

namespace {
const Lattice kLat{2, 192, 96.0};

GridFunction packet(const Lattice& lat, const Vec& x0, const Vec& xi, real w) {
    return GridFunction::sample(lat, [&](const Vec& x) {
        Vec d = x - x0;
        return std::exp(cplx(-d.norm2() / (2 * w * w), xi.dot(x)));
    });
}
}  // namespace

TEST_CASE("flat metric mollifies to the identity coefficients") {
    auto m = makeMetric("flat", {});
    MollifiedCoeff mc(m, 0, kLat);
    for (int i = 1; i <= 2; ++i)
        for (int be = 0; be <= 2; ++be) REQUIRE(mc.perturbation(i, be, 0.0).linf() < 1e-13);
}

TEST_CASE("mollification is linear in the perturbation") {
    auto m1 = makeMetric("radial_bump", {{"eps0", 0.02}});
    auto m2 = makeMetric("radial_bump", {{"eps0", 0.04}});
    MollifiedCoeff c1(m1, 0, kLat), c2(m2, 0, kLat);
    const auto& p1 = c1.perturbation(1, 1, 0.0);
    const auto& p2 = c2.perturbation(1, 1, 0.0);
    real err = 0, scale = p1.linf();
    for (std::size_t i = 0; i < p1.size(); ++i) err = std::max(err, std::abs(p2.v[i] - 2.0 * p1.v[i]));
    REQUIRE(err < 1e-10 * scale);
}

TEST_CASE("mollified coefficients have low-pass spectrum") {
    auto m = makeMetric("radial_bump", {{"eps0", 0.02}});
    MollifiedCoeff mc(m, 0, kLat);
    const auto& p = mc.perturbation(1, 1, 0.0);
    GridFunction fh = toSpectrum(p);
    real inBand = 0, tail = 0;
    real cut = std::pow(2.0, -3);  // spectrum concentrated below 2^{k-3}
    for (std::size_t i = 0; i < fh.size(); ++i) {
        real r = fh.lat.freq(i).norm();
        (r <= cut ? inBand : tail) += std::norm(fh.v[i]);
    }
    REQUIRE(tail <= 1e-3 * (inBand + tail));
}

TEST_CASE("coeffak second derivative bound on the sampled lattice") {
    // needs a box large enough that spatial frequencies below 2^{k-4} exist
    Lattice big{2, 256, 256.0};
    auto m = makeMetric("radial_bump", {{"eps0", 0.02}});
    auto prof = flatnessProfile(m, -6, 8);
    MollifiedCoeff mc(m, 0, big);
    const auto& p = mc.perturbation(1, 1, 0.0);
    // spectral second derivative d^2/dx1^2
    GridFunction d2 = spectralDerivative(spectralDerivative(p, 0), 0);
    REQUIRE(d2.linf() > 0);
    real worstC = 0;
    for (std::size_t i = 0; i < d2.size(); ++i) {
        real r = big.coord(i).norm();
        if (r > big.L / 2 * 0.9) continue;  // stay off the box corners
        real bound = prof.epsK(0, r) / sq(1 + r);
        if (bound > 0) worstC = std::max(worstC, std::abs(d2.v[i]) / bound);
    }
    INFO("coeffak |alpha|=2 recorded constant: " << worstC);
    REQUIRE(worstC > 0);
    REQUIRE(worstC < 64.0);
}

TEST_CASE("dyadic piece bound (aijl)") {
    Lattice big{2, 256, 256.0};
    auto m = makeMetric("radial_bump", {{"eps0", 0.02}});
    auto prof = flatnessProfile(m, -6, 8);
    GridFunction raw = GridFunction::sample(big, [&](const Vec& x) {
        return m.a(1, 1, 0.0, x) - 1.0;
    });
    real worstC = 0;
    for (int l = lpFreqMin(big); l <= lpFreqMax(big); ++l) {
        GridFunction piece = freqProject(raw, l);
        for (std::size_t i = 0; i < piece.size(); ++i) {
            real r = big.coord(i).norm();
            if (r < 0.5 || r > big.L / 2 * 0.9) continue;
            int mAnn = int(std::floor(std::log2(r)));
            if (mAnn + l < 0) continue;
            real em = prof.epsAt(mAnn);
            if (em <= 0) continue;
            real bound = std::pow(2.0, -2 * mAnn - 2 * l) * em;
            worstC = std::max(worstC, std::abs(piece.v[i]) / bound);
        }
    }
    INFO("aijl recorded constant: " << worstC);
    REQUIRE(worstC < 64.0);
}

TEST_CASE("P_(k) on plane waves over flat metric") {
    auto m = makeMetric("flat", {});
    Lattice lat{2, 64, 64.0};
    MollifiedCoeff mc(m, 0, lat);
    real k1 = 2 * pi / lat.L * 10;  // lattice-commensurate frequency
    Vec xi(2, k1, 0.0);
    real dt = 0.01;

    auto makeWave = [&](real tau) {
        SpaceTimeField u;
        for (int f = 0; f < 7; ++f) {
            real t = f * dt;
            u.times.push_back(t);
            u.frames.push_back(GridFunction::sample(
                lat, [&](const Vec& x) { return std::exp(cplx(0, xi.dot(x) - tau * t)); }));
        }
        return u;
    };

    SECTION("exact dispersion: tau = |xi| gives P u = 0") {
        auto pu = applyPk(makeWave(xi.norm()), mc);
        REQUIRE(pu.frames[1].linf() < 1e-6);
    }
    SECTION("off-shell symbol value (|xi|^2 - tau^2) u") {
        real tau = 0.77;
        auto pu = applyPk(makeWave(tau), mc);
        real expect = xi.norm2() - tau * tau;
        real err = 0;
        for (std::size_t i = 0; i < pu.frames[1].size(); ++i) {
            cplx uval = std::exp(cplx(0, xi.dot(lat.coord(i)) - tau * pu.times[1]));
            err = std::max(err, std::abs(pu.frames[1].v[i] - expect * uval));
        }
        REQUIRE(err < 1e-6 * std::abs(expect));
    }
}

TEST_CASE("spatial part of P_(k) is symmetric when a^{i0} = 0") {
    auto m = makeMetric("radial_bump", {{"eps0", 0.05}});
    MollifiedCoeff mc(m, 0, kLat);
    CounterRng rng(3);
    GridFunction u = packet(kLat, Vec(2, 4.0, 1.0), Vec(2, 1.0, 0.2), 3.0);
    GridFunction w = packet(kLat, Vec(2, -2.0, 3.0), Vec(2, 0.8, -0.5), 2.5);
    auto applyA = [&](const GridFunction& f) {
        auto grads = gradient(f);
        GridFunction div(kLat);
        for (int i = 1; i <= 2; ++i) {
            GridFunction vi = grads[i - 1];
            for (int j = 1; j <= 2; ++j) {
                const auto& p = mc.perturbation(i, j, 0.0);
                for (std::size_t q = 0; q < vi.size(); ++q) vi.v[q] += p.v[q] * grads[j - 1].v[q];
            }
            div += spectralDerivative(vi, i - 1);
        }
        return div;
    };
    GridFunction Au = applyA(u), Aw = applyA(w);
    cplx d = inner(Au, w) - inner(u, Aw);
    REQUIRE(std::abs(d) < 1e-8 * u.l2() * w.l2());
}

TEST_CASE("empirical (tamak)-type ratio for the mollification error") {
    auto m = makeMetric("radial_bump", {{"eps0", 0.02}});
    auto prof = flatnessProfile(m, -6, 8);
    Lattice lat{2, 128, 64.0};
    MollifiedCoeff mc(m, 0, lat);
    CounterRng rng(11);
    real dt = 0.05, worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        Vec x0(2, rng.uniform(-6, 6), rng.uniform(-6, 6));
        real th = rng.uniform(0, 2 * pi);
        Vec xi(2, std::cos(th), std::sin(th));
        real w = rng.uniform(2.0, 4.0);
        SpaceTimeField u;
        for (int f = 0; f < 7; ++f) {
            real t = f * dt;
            u.times.push_back(t);
            // rigid frequency-1 travelling packet, smooth in t
            u.frames.push_back(GridFunction::sample(lat, [&](const Vec& x) {
                Vec d = x - x0;
                d[0] -= t;
                return std::exp(cplx(-d.norm2() / (2 * w * w), xi.dot(x) - xi.norm() * t));
            }));
        }
        SpaceTimeField us;
        us.times = u.times;
        for (auto& f : u.frames) us.frames.push_back(freqProject(f, 0));
        auto pMoll = applyPk(us, mc);
        auto pRaw = applyPrincipalRaw(us, m);
        SpaceTimeField diff;
        diff.times = pMoll.times;
        for (std::size_t f = 0; f < pMoll.count(); ++f) {
            GridFunction d = pMoll.frames[f];
            d -= pRaw.frames[f];
            diff.frames.push_back(std::move(d));
        }
        // majorant |grad S_0 u| per frame (max over first derivatives)
        SpaceTimeField gradU;
        gradU.times = diff.times;
        for (std::size_t f = 2; f + 2 < us.count(); ++f) {
            auto grads = gradient(us.frames[f]);
            GridFunction g(lat);
            for (std::size_t q = 0; q < g.size(); ++q) {
                real best = 0;
                for (int d = 0; d < 2; ++d) best = std::max(best, std::abs(grads[d].v[q]));
                g.v[q] = best;
            }
            gradU.frames.push_back(std::move(g));
        }
        real num = normYkProxy(diff, 0);
        real den = normXk(gradU, 0);
        if (den > 0) worst = std::max(worst, num / den);
    }
    real C = worst / prof.total();
    INFO("(tamak) empirical constant: " << C);
    REQUIRE(worst <= 64.0 * prof.total());
}

TEST_CASE("k outside the resolvable range is rejected") {
    auto m = makeMetric("flat", {});
    REQUIRE_THROWS_AS(MollifiedCoeff(m, 40, kLat), std::invalid_argument);
    auto bump = makeMetric("a00_perturbed", {{"eps0", 0.02}});
    REQUIRE_THROWS_AS(MollifiedCoeff(bump, 0, kLat), std::invalid_argument);  // not normal form
}
