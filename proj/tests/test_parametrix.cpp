// Angular partition, K_0 assembly, jump condition, localization diagnostics,
// and the K_01 exponential correction.
#include <catch2/catch_amalgamated.hpp>

#include "outwave/parametrix.hpp"
#include "outwave/rng.hpp"

using namespace outwave;

namespace {
const Lattice kLat{2, 256, 128.0};

GridFunction freqOneGaussian(const Lattice& lat, const Vec& x0, real w) {
    // radial frequency-1 profile so mass spreads over all directions
    return GridFunction::sample(lat, [&](const Vec& x) {
        Vec d = x - x0;
        real r = d.norm();
        return std::exp(-r * r / (2 * w * w)) * std::cos(r);
    });
}

struct Bundle {
    MetricField m;
    DyadicProfile prof;
    SymbolRep a0;
};
Bundle makeBundle(real eps0) {
    Bundle b{makeMetric("radial_bump", {{"eps0", eps0}, {"R", 4}}), {}, {}};
    b.prof = flatnessProfile(b.m, -2, 7);
    b.a0 = buildA0(b.m, b.prof, +1);
    return b;
}
}  // namespace

TEST_CASE("partition of unity over j and signs") {
    PartitionQuantizer pp(kLat, +1), pm(kLat, -1);
    CounterRng rng(3);
    int jMax = 5;
    for (int trial = 0; trial < 400; ++trial) {
        real rx = std::pow(2.0, rng.uniform(-3.0, std::log2(30.0)));
        real thx = rng.uniform(0, 2 * pi);
        Vec x(2, rx * std::cos(thx), rx * std::sin(thx));
        real thxi = rng.uniform(0, 2 * pi);
        Vec xi(2, std::cos(thxi), std::sin(thxi));  // |xi| = 1
        real sum = 0;
        for (int j = 0; j <= jMax; ++j) sum += pp.symbol(j, x, xi) + pm.symbol(j, x, xi);
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("strongly incoming points are outside supp p_j^+") {
    PartitionQuantizer pp(kLat, +1);
    Vec x(2, 10.0, 0.0);
    Vec xi(2, -0.5, std::sqrt(1 - 0.25));  // x.xi = -|x||xi|/2
    for (int j = 0; j <= 5; ++j) REQUIRE(pp.symbol(j, x, xi) == 0.0);
}

TEST_CASE("quantized partition piece localizes in the annulus") {
    PartitionQuantizer pp(kLat, +1);
    GridFunction f = freqOneGaussian(kLat, Vec(2, 0.0, 0.0), 4.0);
    int j = 3;
    GridFunction pf = pp.apply(f, j);
    real inside = 0, total = 0;
    for (std::size_t i = 0; i < pf.size(); ++i) {
        real m = std::norm(pf.v[i]);
        total += m;
        real r = kLat.coord(i).norm();
        if (r > std::pow(2.0, j - 2) && r < std::pow(2.0, j + 2)) inside += m;
    }
    REQUIRE(total > 0);
    REQUIRE(1.0 - inside / total <= 1e-3);
}

TEST_CASE("quantized pieces sum to the band projection") {
    PartitionQuantizer pp(kLat, +1), pm(kLat, -1);
    GridFunction f = freqOneGaussian(kLat, Vec(2, 1.0, -2.0), 4.0);
    GridFunction sum(kLat);
    for (int j = 0; j <= 5; ++j) {
        sum += pp.apply(f, j);
        sum += pm.apply(f, j);
    }
    GridFunction band = f;
    applyMultiplier(band, [](const Vec& xi) { return PartitionQuantizer::band(xi.norm()); });
    GridFunction d = sum;
    d -= band;
    REQUIRE(d.l2() <= 2e-3 * band.l2());
}

TEST_CASE("jump condition at the source time") {
    // K_0(s+0,s) - K_0(s-0,s) applied to S_0-localized f equals the quantized
    // partition sum, which telescopes to the band projection
    PartitionQuantizer pp(kLat, +1), pm(kLat, -1);
    CounterRng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        Vec x0(2, rng.uniform(-4, 4), rng.uniform(-4, 4));
        GridFunction f = freqOneGaussian(kLat, x0, rng.uniform(3.0, 5.0));
        GridFunction s0f = freqProject(f, 0);
        GridFunction jump(kLat);
        for (int j = 0; j <= 5; ++j) {
            jump += pp.apply(s0f, j);   // K_0(s+0) branch sources
            jump += pm.apply(s0f, j);   // -K_0(s-0) = +sum of backward sources
        }
        jump -= s0f;
        REQUIRE(jump.l2() <= 0.1 * s0f.l2());
    }
}

TEST_CASE("assembled K_0 on the flat metric matches the half-wave group") {
    SymbolRep a0;
    a0.n = 2;
    auto flatM = makeMetric("flat", {});
    auto prof = flatnessProfile(flatM, -2, 7);
    GridFunction f = freqOneGaussian(kLat, Vec(2, 0.0, 0.0), 3.0);
    ParametrixOptions opt;
    opt.jMax = 4;
    opt.evo.dt = 0.25;
    opt.evo.snapshotTimes = {24.0};
    real s = 8.0;
    auto run = assembleK0(f, a0, prof, s, opt);
    REQUIRE(run.partitionResidual <= 1e-3);
    // flat oracle: half-wave group applied to the summed forward sources
    GridFunction src(kLat);
    for (const auto& p : run.sources) src += p;
    GridFunction expect = flatPropagator(src, 16.0, FlatBranch::HalfWavePlus);
    // truncation band of the evolution
    DampedHalfWave solver(kLat, +1, a0, DampingApplier::none(), opt.evo);
    GridFunction d = run.sum.frames.back();
    d -= expect;
    // tolerance covers the damping acting on partition tails
    REQUIRE(d.l2() <= 2e-3 * expect.l2());
}

TEST_CASE("damped branch localization diagnostics") {
    auto bundle = makeBundle(0.02);
    GridFunction f = freqOneGaussian(kLat, Vec(2, 0.0, 0.0), 3.0);
    PartitionQuantizer pp(kLat, +1);
    int j = 3;
    GridFunction src = pp.apply(f, j);
    DampingSymbol b = buildDamping(j, bundle.prof);
    EvolveOptions evo;
    evo.dt = 0.25;
    evo.snapshotTimes = {12.0, 24.0, 40.0};
    auto res = evolveDamped(src, 8.0, 40.0, +1, bundle.a0, DampingApplier::sector(b), evo);
    auto diags = branchDiagnostics(res.snapshots, 8.0, j, &b, f.l1());
    REQUIRE(diags.size() == 3);
    for (const auto& d : diags) {
        REQUIRE(d.freqTailLow <= 1e-4);
        REQUIRE(d.freqTailHigh <= 1e-4);
        REQUIRE(d.outerMassPaper <= 1e-6);
        REQUIRE(d.innerMassDesk <= 5e-3);
        REQUIRE(d.innerMassPaper <= d.innerMassDesk + 1e-15);
    }
    // inner mass decays once the wave has left the core
    REQUIRE(diags.back().innerMassDesk <= diags.front().innerMassDesk + 1e-6);
}

TEST_CASE("K_01 solves its defining ODE") {
    // the exponential kernel has a derivative kink on the diagonal, so the
    // trapezoid + stencil error is O(dt^2); a tiny spatial lattice keeps the
    // fine time resolution cheap
    Lattice lat{1, 8, 16.0};
    SpaceTimeField g;
    real dt = 1.0 / 640;
    int F = int(std::round(20.0 / dt)) + 1;
    for (int k = 0; k < F; ++k) {
        real t = -10.0 + k * dt;
        g.times.push_back(t);
        GridFunction frame(lat);
        real amp = std::exp(-t * t / 4.0);  // compact-ish in time
        for (std::size_t i = 0; i < frame.size(); ++i)
            frame.v[i] = amp * std::exp(-sq(lat.coord(i)[0]) / 8.0);
        g.frames.push_back(std::move(frame));
    }
    auto Kg = applyK01(g);
    // d_t^2 K01 g = g + K01 g away from the window edges
    for (int k = F / 4; k < 3 * F / 4; k += F / 9) {
        GridFunction dtt(lat);
        for (std::size_t i = 0; i < dtt.size(); ++i)
            dtt.v[i] = (Kg.frames[k + 1].v[i] - 2.0 * Kg.frames[k].v[i] + Kg.frames[k - 1].v[i]) /
                       (dt * dt);
        GridFunction rhs = g.frames[k];
        rhs += Kg.frames[k];
        dtt -= rhs;
        REQUIRE(dtt.l2() <= 1e-6 * std::max(1.0, rhs.l2()));
    }
}
