// Reference wave solver: dispersion exactness on plane waves, energy
// conservation, time reversal, finite speed, flat propagators, decay fits.
#include <catch2/catch_amalgamated.hpp>

#include "outwave/oracle.hpp"

using namespace outwave;

namespace {
GridFunction radialFreqBump(const Lattice& lat, real w) {
    return GridFunction::sample(lat, [&](const Vec& x) {
        real r = x.norm();
        // frequency ~1 radial profile with Gaussian envelope
        return std::exp(-r * r / (2 * w * w)) * std::cos(r);
    });
}
}  // namespace

TEST_CASE("flat plane wave evolves with the exact dispersion relation") {
    // the leapfrog phase error is ~ om^3 dt^2 t / 24; dt is sized so the
    // plane-wave solution is reproduced to 1e-7
    Lattice lat{1, 64, 32.0};
    auto m = makeMetric("flat", {}, 1);
    real k = 2 * pi / lat.L * 5;
    Vec xi(1, k);
    real om = xi.norm();
    GridFunction u0 = GridFunction::sample(lat, [&](const Vec& x) { return std::exp(cplx(0, xi.dot(x))); });
    GridFunction u1 = u0;
    u1 *= cplx(0, -om);
    WaveOptions opt;
    opt.dt = 5e-4;
    opt.snapshotTimes = {6.0};
    auto run = solveWave(m, u0, u1, zeroSource, 6.0, opt);
    GridFunction expect = GridFunction::sample(lat, [&](const Vec& x) {
        return std::exp(cplx(0, xi.dot(x) - om * 6.0));
    });
    GridFunction diff = run.u.frames[0];
    diff -= expect;
    REQUIRE(diff.l2() < 1e-7 * expect.l2());
}

TEST_CASE("leapfrog phase error is second order in dt") {
    Lattice lat{1, 64, 32.0};
    auto m = makeMetric("flat", {}, 1);
    real k = 2 * pi / lat.L * 4;
    Vec xi(1, k);
    GridFunction u0 = GridFunction::sample(lat, [&](const Vec& x) { return std::exp(cplx(0, xi.dot(x))); });
    GridFunction u1 = u0;
    u1 *= cplx(0, -k);
    auto phaseErr = [&](real dt) {
        WaveOptions opt;
        opt.dt = dt;
        opt.snapshotTimes = {8.0};
        auto run = solveWave(m, u0, u1, zeroSource, 8.0, opt);
        GridFunction expect = GridFunction::sample(lat, [&](const Vec& x) {
            return std::exp(cplx(0, xi.dot(x) - k * 8.0));
        });
        GridFunction d = run.u.frames[0];
        d -= expect;
        return d.l2() / expect.l2();
    };
    real e1 = phaseErr(0.08), e2 = phaseErr(0.04);
    INFO("e(dt)=" << e1 << " e(dt/2)=" << e2);
    REQUIRE(e1 / e2 > 3.0);
    REQUIRE(e1 / e2 < 5.0);
}

TEST_CASE("energy conservation for a time-independent metric") {
    Lattice lat{2, 128, 64.0};
    auto m = makeMetric("radial_bump", {{"eps0", 0.02}, {"R", 4}});
    GridFunction u0 = radialFreqBump(lat, 2.0);
    GridFunction u1(lat);
    WaveOptions opt;
    opt.dt = 0.2;
    opt.snapshotTimes = {20.0};
    auto run = solveWave(m, u0, u1, zeroSource, 20.0, opt);
    real e0 = run.energy.front();
    for (real e : run.energy) REQUIRE(std::abs(e - e0) <= 1e-6 * e0);
}

TEST_CASE("time reversal returns the data") {
    Lattice lat{2, 96, 48.0};
    auto m = makeMetric("radial_bump", {{"eps0", 0.02}, {"R", 4}});
    GridFunction u0 = radialFreqBump(lat, 2.0);
    GridFunction u1(lat);
    WaveOptions opt;
    opt.dt = 0.1;
    opt.snapshotTimes = {8.0};
    auto fwd = solveWave(m, u0, u1, zeroSource, 8.0, opt);
    // reverse: start from u(T) with -u_t(T)
    GridFunction v0 = fwd.u.frames[0];
    GridFunction v1 = fwd.ut.frames[0];
    v1 *= -1.0;
    auto bwd = solveWave(m, v0, v1, zeroSource, 8.0, opt);
    GridFunction d = bwd.u.frames[0];
    d -= u0;
    REQUIRE(d.l2() < 1e-6 * u0.l2());
}

TEST_CASE("finite propagation speed on the flat metric") {
    Lattice lat{2, 128, 64.0};
    auto m = makeMetric("flat", {});
    real w = 1.5;
    GridFunction u0 = radialFreqBump(lat, w);
    GridFunction u1(lat);
    WaveOptions opt;
    opt.dt = 0.1;
    opt.snapshotTimes = {12.0};
    auto run = solveWave(m, u0, u1, zeroSource, 12.0, opt);
    // support radius r0: captures all but 1e-10 of the data mass
    real r0 = 6 * w;
    real out = 0, tot = 0;
    for (std::size_t q = 0; q < lat.size(); ++q) {
        real mass = std::norm(run.u.frames[0].v[q]);
        tot += mass;
        if (lat.coord(q).norm() > r0 + 12.0 * 1.01) out += mass;
    }
    REQUIRE(out <= 1e-8 * tot);
}

TEST_CASE("flat propagators") {
    Lattice lat{2, 64, 32.0};
    GridFunction u = radialFreqBump(lat, 2.0);
    SECTION("t = 0 is the identity") {
        for (auto br : {FlatBranch::HalfWavePlus, FlatBranch::FullWaveSine}) {
            GridFunction v = flatPropagator(u, 0.0, br);
            if (br == FlatBranch::FullWaveSine) {
                REQUIRE(v.l2() < 1e-12);  // sine branch vanishes at t = 0
            } else {
                GridFunction d = v;
                d -= u;
                REQUIRE(d.l2() < 1e-12);
            }
        }
    }
    SECTION("half-wave branches compose to the identity") {
        GridFunction v = flatPropagator(flatPropagator(u, 3.7, FlatBranch::HalfWavePlus), 3.7,
                                        FlatBranch::HalfWaveMinus);
        v -= u;
        REQUIRE(v.l2() < 1e-12 * u.l2());
    }
    SECTION("sine propagator solves the flat wave equation") {
        auto m = makeMetric("flat", {});
        GridFunction z(lat);
        WaveOptions opt;
        opt.dt = 5e-4;
        opt.snapshotTimes = {1.0};
        auto run = solveWave(m, z, u, zeroSource, 1.0, opt);
        GridFunction expect = flatPropagator(u, 1.0, FlatBranch::FullWaveSine);
        GridFunction d = run.u.frames[0];
        d -= expect;
        REQUIRE(d.l2() < 1e-7 * std::max(1.0, expect.l2()));
    }
}

TEST_CASE("decay fitting") {
    std::vector<real> t, v1, v2;
    for (int i = 0; i < 30; ++i) {
        real tt = 4.0 + i * 2.0;
        t.push_back(tt);
        v1.push_back(std::pow(tt, -0.5));
        v2.push_back(3.7 * std::pow(tt, -1.0));
    }
    auto f1 = fitDecay(t, v1, 4.0, 64.0);
    REQUIRE(f1.slope == Catch::Approx(-0.5).margin(1e-12));
    REQUIRE(f1.stderr_ < 1e-12);
    auto f2 = fitDecay(t, v2, 4.0, 64.0);
    REQUIRE(f2.slope == Catch::Approx(-1.0).margin(1e-12));
    std::vector<real> bad = v1;
    bad[3] = -1.0;
    REQUIRE_THROWS(fitDecay(t, bad, 4.0, 64.0));
}

TEST_CASE("CFL violation is rejected") {
    Lattice lat{2, 64, 32.0};
    auto m = makeMetric("flat", {});
    GridFunction u0 = radialFreqBump(lat, 2.0), u1(lat);
    WaveOptions opt;
    opt.dt = 0.5;  // dx = 0.5, bound is 0.2
    REQUIRE_THROWS(solveWave(m, u0, u1, zeroSource, 1.0, opt));
}
