// Damped half-wave evolution: exactness on the flat propagator, the
// commuting-scalar-damping closed form, L2 contraction, and the effect of the
// sector-quantized damping on incoming data.
#include <catch2/catch_amalgamated.hpp>

#include "outwave/evolve.hpp"
#include "outwave/halfwave.hpp"
#include "outwave/rng.hpp"

using namespace outwave;

namespace {
const Lattice kLat{2, 256, 128.0};

GridFunction freqOnePacket(const Lattice& lat, const Vec& x0, const Vec& dir, real w) {
    return GridFunction::sample(lat, [&](const Vec& x) {
        Vec d = x - x0;
        return std::exp(cplx(-d.norm2() / (2 * w * w), dir.dot(x)));
    });
}

GridFunction flatHalfWaveExact(const GridFunction& u, real T, int sign) {
    GridFunction v = u;
    applyMultiplier(v, [&](const Vec& xi) { return std::exp(cplx(0, -sign * T * xi.norm())); });
    return v;
}
}  // namespace

TEST_CASE("flat evolution matches the Fourier multiplier propagator") {
    SymbolRep a0;  // zero perturbation
    a0.n = 2;
    GridFunction u0 = freqOnePacket(kLat, Vec(2, 3.0, -2.0), Vec(2, 1.0, 0.0), 3.0);
    EvolveOptions opt;
    opt.dt = 0.25;
    opt.snapshotTimes = {8.0, 24.0, 40.0};
    auto res = evolveDamped(u0, 8.0, 40.0, +1, a0, DampingApplier::none(), opt);
    REQUIRE(res.snapshots.count() == 3);
    // compare against the exact propagator applied to the truncated data
    DampedHalfWave solver(kLat, +1, a0, DampingApplier::none(), opt);
    GridFunction base = res.snapshots.frames[0];
    for (std::size_t f = 1; f < res.snapshots.count(); ++f) {
        GridFunction expect = flatHalfWaveExact(base, res.snapshots.times[f] - 8.0, +1);
        GridFunction diff = res.snapshots.frames[f];
        diff -= expect;
        REQUIRE(diff.l2() < 1e-7 * expect.l2());
    }
}

TEST_CASE("spatially constant damping factorizes in closed form") {
    SymbolRep a0;
    a0.n = 2;
    GridFunction u0 = freqOnePacket(kLat, Vec(2, 0.0, 0.0), Vec(2, 0.0, 1.0), 3.0);
    EvolveOptions opt;
    opt.dt = 0.25;
    opt.snapshotTimes = {32.0};
    auto damped = evolveDamped(u0, 8.0, 32.0, +1,
                               a0, DampingApplier::scalarRate([](real t) { return std::pow(t, -0.75); }),
                               opt);
    auto free = evolveDamped(u0, 8.0, 32.0, +1, a0, DampingApplier::none(), opt);
    real factor = std::exp(-4.0 * (std::pow(32.0, 0.25) - std::pow(8.0, 0.25)));
    GridFunction expect = free.snapshots.frames[0];
    expect *= factor;
    GridFunction diff = damped.snapshots.frames[0];
    diff -= expect;
    REQUIRE(diff.l2() < 1e-6 * expect.l2());
}

TEST_CASE("perturbed damped run: L2 never grows beyond tolerance") {
    auto m = makeMetric("radial_bump", {{"eps0", 0.02}, {"R", 4}});
    auto prof = flatnessProfile(m, -2, 7);
    auto a0 = buildA0(m, prof, +1);
    auto b = buildDamping(3, prof);
    GridFunction u0 = freqOnePacket(kLat, Vec(2, 8.0, 0.0), Vec(2, 1.0, 0.0), 3.0);
    EvolveOptions opt;
    opt.dt = 0.25;
    opt.snapshotTimes = {72.0};
    auto res = evolveDamped(u0, 8.0, 72.0, +1, a0, DampingApplier::sector(b), opt);
    INFO("max one-step relative growth " << res.audit.maxStepGrowth);
    REQUIRE(res.audit.maxStepGrowth <= 1e-6 * opt.dt + 1e-12);
    REQUIRE(res.audit.l2.back() <= res.audit.l2.front() * (1 + 1e-5 * 64.0));
}

TEST_CASE("sector damping kills incoming mass, spares outgoing") {
    auto m = makeMetric("radial_bump", {{"eps0", 0.02}, {"R", 4}});
    auto prof = flatnessProfile(m, -2, 7);
    auto a0 = buildA0(m, prof, +1);
    auto b = buildDamping(3, prof);
    EvolveOptions opt;
    opt.dt = 0.25;
    opt.snapshotTimes = {24.0};

    // outgoing packet: x and xi aligned, in D at launch
    GridFunction uOut = freqOnePacket(kLat, Vec(2, 8.0, 0.0), Vec(2, 1.0, 0.0), 4.0);
    auto rOut = evolveDamped(uOut, 8.0, 24.0, +1, a0, DampingApplier::sector(b), opt);
    real keptOut = rOut.audit.l2.back() / rOut.audit.l2.front();
    REQUIRE(keptOut > 0.95);

    // incoming packet: xi against x, inside E at launch
    GridFunction uIn = freqOnePacket(kLat, Vec(2, 24.0, 0.0), Vec(2, -1.0, 0.0), 4.0);
    auto rIn = evolveDamped(uIn, 8.0, 24.0, +1, a0, DampingApplier::sector(b), opt);
    real keptIn = rIn.audit.l2.back() / rIn.audit.l2.front();
    // expected attenuation along the incoming path ~ e^{-int_8^24 t^{-3/4}}
    real psi = 4.0 * (std::pow(24.0, 0.25) - std::pow(8.0, 0.25));
    INFO("kept in " << keptIn << " vs e^{-psi} " << std::exp(-psi));
    REQUIRE(keptIn < 2.0 * std::exp(-psi));
    REQUIRE(keptOut / keptIn > 5.0);
}

TEST_CASE("snapshot schedule must align with the step") {
    SymbolRep a0;
    a0.n = 2;
    GridFunction u0 = freqOnePacket(kLat, Vec(2, 0.0, 0.0), Vec(2, 1.0, 0.0), 2.0);
    EvolveOptions opt;
    opt.dt = 0.3;
    REQUIRE_THROWS(evolveDamped(u0, 0.0, 1.0, +1, a0, DampingApplier::none(), opt));
}
