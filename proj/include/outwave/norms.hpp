// Localized-energy norms X_k / X^s / X~^s, the weighted X_{k,alpha} and its
// explicit dual X'_{k,alpha} (used as an upper-bound proxy for Y norms),
// mixed space-time L^p L^q norms, Strichartz-pair arithmetic, and the Hardy
// ratio. Annuli A_j = {2^j <= |x| < 2^{j+1}} are intersected with the box;
// the origin cell uses the floor radius h for singular |x| weights.
#pragma once

#include <map>
#include <optional>
#include <sstream>

#include "lp.hpp"

namespace outwave {

// slowly varying weight sequence alpha_m with a log-linear envelope
struct AlphaSeq {
    int mMin = -8;
    std::vector<real> a;

    static AlphaSeq uniform(int mMin, int mMax) {
        AlphaSeq s;
        s.mMin = mMin;
        s.a.assign(mMax - mMin + 1, 1.0 / (mMax - mMin + 1));
        return s;
    }
    static AlphaSeq geometric(int mMin, int mMax, real ratio) {
        AlphaSeq s;
        s.mMin = mMin;
        real w = 1, tot = 0;
        for (int m = mMin; m <= mMax; ++m, w *= ratio) {
            s.a.push_back(w);
            tot += w;
        }
        for (auto& x : s.a) x /= tot;
        return s;
    }
    void normalize() {
        real t = 0;
        for (real x : a) t += x;
        for (auto& x : a) x /= t;
    }
    real at(int m) const {
        int i = std::clamp(m - mMin, 0, int(a.size()) - 1);
        return a[i];
    }
    // envelope alpha(s), log-linear between octave midpoints
    real envelope(real s) const {
        if (s <= 0) return at(mMin);
        real u = std::log2(s) - 0.5;
        int m = int(std::floor(u));
        real frac = u - m;
        real lo = std::log(at(m)), hi = std::log(at(m + 1));
        return std::exp(lo + frac * (hi - lo));
    }
    real total() const {
        real t = 0;
        for (real x : a) t += x;
        return t;
    }
};

namespace detail {

inline real floorRadius(const Lattice& lat, const Vec& x) {
    return std::max(x.norm(), lat.h());
}

// sum of |u|^2 over a radial shell [lo, hi) per frame, with trapezoidal time
// weights; weightPow scales each point by |x|^weightPow (floored radius).
inline real shellMass(const SpaceTimeField& u, real lo, real hi, real weightPow) {
    const Lattice& lat = u.lat();
    std::vector<real> w(u.count(), 1.0);
    if (u.count() > 1) {
        for (std::size_t f = 0; f < u.count(); ++f) {
            real dtL = f == 0 ? 0 : u.times[f] - u.times[f - 1];
            real dtR = f + 1 == u.count() ? 0 : u.times[f + 1] - u.times[f];
            w[f] = 0.5 * (dtL + dtR);
        }
    }
    real acc = 0;
    std::vector<real> radius(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) radius[i] = lat.coord(i).norm();
    for (std::size_t f = 0; f < u.count(); ++f) {
        real frameAcc = 0;
        const auto& v = u.frames[f].v;
        for (std::size_t i = 0; i < v.size(); ++i) {
            real r = radius[i];
            if (r < lo || r >= hi) continue;
            real m = std::norm(v[i]);
            if (weightPow != 0) m *= std::pow(std::max(r, lat.h()), weightPow);
            frameAcc += m;
        }
        acc += frameAcc * w[f];
    }
    return acc * lat.cellVolume();
}

inline SpaceTimeField asSpaceTime(const GridFunction& g) {
    SpaceTimeField u;
    u.times = {0};
    u.frames = {g};
    return u;
}

inline int latticeJMax(const Lattice& lat) {
    return int(std::ceil(std::log2(lat.L * std::sqrt(real(lat.n)) / 2))) ;
}
inline int latticeJMin(const Lattice& lat) { return int(std::floor(std::log2(lat.h()))); }

}  // namespace detail

// ||u||_{X_k} = 2^{k/2} ||u||_{L2(A_{<-k})} + sup_{j >= -k} || |x|^{-1/2} u ||_{L2(A_j)}
inline real normXk(const SpaceTimeField& u, int k) {
    const Lattice& lat = u.lat();
    real ball = std::sqrt(detail::shellMass(u, 0, std::pow(2.0, -k), 0));
    real best = 0;
    for (int j = std::max(-k, detail::latticeJMin(lat)); j <= detail::latticeJMax(lat); ++j)
        best = std::max(best, std::sqrt(detail::shellMass(u, std::pow(2.0, j), std::pow(2.0, j + 1), -1.0)));
    return std::pow(2.0, 0.5 * k) * ball + best;
}
inline real normXk(const GridFunction& g, int k) { return normXk(detail::asSpaceTime(g), k); }

// ||u||^2_{X_{k,alpha}} = 2^k ||u||^2_{L2(A_{<-k})} + sum alpha_j || |x|^{-1/2} u ||^2_{L2(A_j)}
inline real normXkAlpha(const SpaceTimeField& u, int k, const AlphaSeq& alpha) {
    const Lattice& lat = u.lat();
    real s = std::pow(2.0, k) * detail::shellMass(u, 0, std::pow(2.0, -k), 0);
    for (int j = std::max(-k, detail::latticeJMin(lat)); j <= detail::latticeJMax(lat); ++j)
        s += alpha.at(j) * detail::shellMass(u, std::pow(2.0, j), std::pow(2.0, j + 1), -1.0);
    return std::sqrt(s);
}

// explicit dual expression, the Y_k upper-bound proxy:
// ||u||^2_{X'_{k,alpha}} = 2^{-k} ||u||^2_{L2(A_{<-k})} + sum alpha_j^{-1} || |x|^{1/2} u ||^2_{L2(A_j)}
inline real normXkAlphaDual(const SpaceTimeField& u, int k, const AlphaSeq& alpha) {
    const Lattice& lat = u.lat();
    real s = std::pow(2.0, -k) * detail::shellMass(u, 0, std::pow(2.0, -k), 0);
    for (int j = std::max(-k, detail::latticeJMin(lat)); j <= detail::latticeJMax(lat); ++j)
        s += detail::shellMass(u, std::pow(2.0, j), std::pow(2.0, j + 1), 1.0) / alpha.at(j);
    return std::sqrt(s);
}
inline real normYkProxy(const SpaceTimeField& u, int k) {
    AlphaSeq ones;
    ones.mMin = 0;
    ones.a = {1.0};
    return normXkAlphaDual(u, k, ones);
}
inline real normYkProxy(const GridFunction& g, int k) { return normYkProxy(detail::asSpaceTime(g), k); }

// per-frame frequency projection
inline SpaceTimeField projectSk(const SpaceTimeField& u, int k) {
    SpaceTimeField out;
    out.times = u.times;
    out.frames.reserve(u.count());
    for (const auto& f : u.frames) out.frames.push_back(freqProject(f, k));
    return out;
}

// ||u||^2_{X^s} = sum_k 2^{2sk} ||S_k u||^2_{X_k} over the resolvable range
inline real normXs(const SpaceTimeField& u, real s) {
    const Lattice& lat = u.lat();
    if (std::abs(s) >= (lat.n + 1) / 2.0) throw std::invalid_argument("normXs: s out of range");
    real acc = 0;
    for (int k = lpFreqMin(lat); k <= lpFreqMax(lat); ++k)
        acc += std::pow(2.0, 2 * s * k) * sq(normXk(projectSk(u, k), k));
    return std::sqrt(acc);
}
inline real normXs(const GridFunction& g, real s) { return normXs(detail::asSpaceTime(g), s); }

inline real weightedL2(const SpaceTimeField& u, real pow) {
    const Lattice& lat = u.lat();
    return std::sqrt(detail::shellMass(u, 0, lat.L * lat.n, 2 * pow));
}

inline real normXsTilde(const SpaceTimeField& u, real s) {
    if (s <= 0 || s >= (u.lat().n + 1) / 2.0)
        throw std::invalid_argument("normXsTilde: s out of range");
    return std::sqrt(sq(normXs(u, s)) + sq(weightedL2(u, -0.5 - s)));
}

inline real normYsProxy(const SpaceTimeField& u, real s) {
    const Lattice& lat = u.lat();
    if (std::abs(s) >= (lat.n + 1) / 2.0) throw std::invalid_argument("normYsProxy: s out of range");
    real acc = 0;
    for (int k = lpFreqMin(lat); k <= lpFreqMax(lat); ++k)
        acc += std::pow(2.0, 2 * s * k) * sq(normYkProxy(projectSk(u, k), k));
    return std::sqrt(acc);
}

// mixed L^p_t L^q_x (p or q infinite -> max); single frame means pure L^q
inline real normLpLq(const SpaceTimeField& u, real p, real q) {
    std::vector<real> frameNorms(u.count());
    const real vol = u.lat().cellVolume();
    for (std::size_t f = 0; f < u.count(); ++f) {
        if (std::isinf(q)) {
            frameNorms[f] = u.frames[f].linf();
        } else {
            real s = 0;
            for (const auto& z : u.frames[f].v) s += std::pow(std::abs(z), q);
            frameNorms[f] = std::pow(s * vol, 1.0 / q);
        }
    }
    if (u.count() == 1) return frameNorms[0];
    if (std::isinf(p)) {
        real m = 0;
        for (real v : frameNorms) m = std::max(m, v);
        return m;
    }
    real acc = 0;
    for (std::size_t f = 0; f < u.count(); ++f) {
        real dtL = f == 0 ? 0 : u.times[f] - u.times[f - 1];
        real dtR = f + 1 == u.count() ? 0 : u.times[f + 1] - u.times[f];
        acc += std::pow(frameNorms[f], p) * 0.5 * (dtL + dtR);
    }
    return std::pow(acc, 1.0 / p);
}

// --- NormSpec: parsed norm descriptors ("Xs(s=0.25)", "LpLq(p=4,q=8)") ------

struct NormSpec {
    enum class Kind { Xk, Xs, XsTilde, YkProxy, YsProxy, LpLq, L2, LinfL2 } kind = Kind::L2;
    int k = 0;
    real s = 0;
    real p = 2, q = 2;
    std::optional<AlphaSeq> alpha;

    static NormSpec parse(const std::string& text);
    std::string format() const;
};

inline real norm(const SpaceTimeField& u, const NormSpec& spec) {
    using K = NormSpec::Kind;
    switch (spec.kind) {
        case K::Xk:
            return spec.alpha ? normXkAlpha(u, spec.k, *spec.alpha) : normXk(u, spec.k);
        case K::Xs: return normXs(u, spec.s);
        case K::XsTilde: return normXsTilde(u, spec.s);
        case K::YkProxy:
            return spec.alpha ? normXkAlphaDual(u, spec.k, *spec.alpha) : normYkProxy(u, spec.k);
        case K::YsProxy: return normYsProxy(u, spec.s);
        case K::LpLq: return normLpLq(u, spec.p, spec.q);
        case K::L2: return normLpLq(u, 2, 2);
        case K::LinfL2: return normLpLq(u, std::numeric_limits<real>::infinity(), 2);
    }
    return 0;
}
inline real norm(const GridFunction& g, const NormSpec& spec) {
    return norm(detail::asSpaceTime(g), spec);
}

inline NormSpec NormSpec::parse(const std::string& text) {
    NormSpec sp;
    auto open = text.find('(');
    std::string head = open == std::string::npos ? text : text.substr(0, open);
    std::map<std::string, real> kv;
    if (open != std::string::npos) {
        auto close = text.rfind(')');
        std::string args = text.substr(open + 1, close - open - 1);
        std::stringstream ss(args);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("NormSpec: bad argument " + item);
            std::string key = item.substr(0, eq), val = item.substr(eq + 1);
            kv[key] = val == "inf" ? std::numeric_limits<real>::infinity() : std::stod(val);
        }
    }
    if (head == "Xk") { sp.kind = Kind::Xk; sp.k = int(kv.at("k")); }
    else if (head == "Xs") { sp.kind = Kind::Xs; sp.s = kv.at("s"); }
    else if (head == "XsTilde") { sp.kind = Kind::XsTilde; sp.s = kv.at("s"); }
    else if (head == "YkProxy") { sp.kind = Kind::YkProxy; sp.k = int(kv.at("k")); }
    else if (head == "YsProxy") { sp.kind = Kind::YsProxy; sp.s = kv.at("s"); }
    else if (head == "LpLq") { sp.kind = Kind::LpLq; sp.p = kv.at("p"); sp.q = kv.at("q"); }
    else if (head == "L2") sp.kind = Kind::L2;
    else if (head == "LinfL2") sp.kind = Kind::LinfL2;
    else throw std::invalid_argument("NormSpec: unknown kind " + head);
    return sp;
}

inline std::string NormSpec::format() const {
    std::ostringstream o;
    switch (kind) {
        case Kind::Xk: o << "Xk(k=" << k << ")"; break;
        case Kind::Xs: o << "Xs(s=" << s << ")"; break;
        case Kind::XsTilde: o << "XsTilde(s=" << s << ")"; break;
        case Kind::YkProxy: o << "YkProxy(k=" << k << ")"; break;
        case Kind::YsProxy: o << "YsProxy(s=" << s << ")"; break;
        case Kind::LpLq: o << "LpLq(p=" << p << ",q=" << q << ")"; break;
        case Kind::L2: o << "L2"; break;
        case Kind::LinfL2: o << "LinfL2"; break;
    }
    return o.str();
}

// --- Strichartz pairs --------------------------------------------------------

struct StrichartzPair {
    real rho = 0, p = 2, q = 2;
    int n = 3;
    bool valid = false, sharp = false, forbiddenEndpoint = false;
};

inline StrichartzPair strichartzPair(real rho, real p, real q, int n) {
    StrichartzPair sp{rho, p, q, n};
    auto invOf = [](real v) { return std::isinf(v) ? 0.0 : 1.0 / v; };
    const real tol = 1e-12;
    bool rangeOk = p >= 2 - tol && q >= 2 - tol;
    real scaling = invOf(p) + n * invOf(q) - (n / 2.0 - rho);
    real admis = 2 * invOf(p) + (n - 1) * invOf(q) - (n - 1) / 2.0;
    sp.forbiddenEndpoint =
        n == 3 && std::abs(rho - 1) < tol && std::abs(p - 2) < tol && std::isinf(q);
    sp.valid = rangeOk && std::abs(scaling) < tol && admis < tol && !sp.forbiddenEndpoint;
    sp.sharp = sp.valid && std::abs(admis) < tol;
    return sp;
}

// Hardy ratio || |x|^{-1/2-s} u ||_{L2} / ||u||_{X^s}, 0 < s < (n-1)/2
inline real hardyRatio(const GridFunction& u, real s) {
    if (s <= 0 || s >= (u.lat.n - 1) / 2.0) throw std::invalid_argument("hardyRatio: s out of range");
    auto stf = detail::asSpaceTime(u);
    real den = normXs(stf, s);
    if (den < 1e-300) throw std::invalid_argument("hardyRatio: zero denominator");
    return weightedL2(stf, -0.5 - s) / den;
}

}  // namespace outwave
