// Hamilton flows x' = a_xi, xi' = -a_x for flow symbols (|xi| + perturbation),
// with the linearized flow integrated alongside through the variational
// equations (the symbol jets are analytic, so the variational matrix is the
// exact Jacobian of the integrated field). Mixed (x_s, xi_t) parametrization
// by block elimination, and the damping integral psi along trajectories.
#pragma once

#include "symbol.hpp"

namespace outwave {

struct PhaseTrajectory {
    int n = 2;
    std::vector<real> times;
    std::vector<Vec> x, xi;
    std::vector<Mat> jac;  // forward Jacobian d(x_t, xi_t)/d(x_s, xi_s), 2n x 2n

    std::size_t count() const { return times.size(); }
};

struct FlowOptions {
    real dt = 0.1;
    bool variational = true;
    real xiLo = std::pow(2.0, -8), xiHi = std::pow(2.0, 8);
    int storeEvery = 1;
};

namespace detail {

struct FlowState {
    Vec x, xi;
    Mat M;

    FlowState scaledAdd(real h, const FlowState& d, bool withM) const {
        FlowState out = *this;
        out.x += h * d.x;
        out.xi += h * d.xi;
        if (withM) out.M = out.M + h * d.M;
        return out;
    }
};

inline FlowState flowRhs(const SymbolRep& a, real t, const FlowState& s, bool variational) {
    SymbolJet J = a.jet(t, s.x, s.xi);
    FlowState d;
    d.x = J.gxi;
    d.xi = Vec(s.x.n);
    for (int i = 0; i < s.x.n; ++i) d.xi[i] = -J.gx[i];
    int n = s.x.n;
    if (variational) {
        Mat A(2 * n, 2 * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                A(i, j) = J.hxxi(j, i);           // d(a_xi_i)/dx_j
                A(i, n + j) = J.hxixi(i, j);      // d(a_xi_i)/dxi_j
                A(n + i, j) = -J.hxx(i, j);       // d(-a_x_i)/dx_j
                A(n + i, n + j) = -J.hxxi(i, j);  // d(-a_x_i)/dxi_j
            }
        d.M = A * s.M;
    }
    return d;
}

}  // namespace detail

inline PhaseTrajectory flow(const SymbolRep& a, real s, const Vec& x0, const Vec& xi0, real t1,
                            FlowOptions opt = {}) {
    using detail::FlowState;
    const int n = x0.n;
    const bool wm = opt.variational;
    PhaseTrajectory traj;
    traj.n = n;
    FlowState st{x0, xi0, Mat::identity(2 * n)};
    real dir = t1 >= s ? 1.0 : -1.0;
    real T = std::abs(t1 - s);
    int steps = std::max(1, int(std::ceil(T / opt.dt - 1e-12)));
    real h = dir * T / steps;

    auto record = [&](real t) {
        traj.times.push_back(t);
        traj.x.push_back(st.x);
        traj.xi.push_back(st.xi);
        if (wm) traj.jac.push_back(st.M);
    };
    record(s);
    real t = s;
    for (int k = 0; k < steps; ++k) {
        real r = st.xi.norm();
        if (r < opt.xiLo || r > opt.xiHi)
            throw std::runtime_error("flow: |xi| left the symbol's valid region");
        FlowState k1 = detail::flowRhs(a, t, st, wm);
        FlowState k2 = detail::flowRhs(a, t + h / 2, st.scaledAdd(h / 2, k1, wm), wm);
        FlowState k3 = detail::flowRhs(a, t + h / 2, st.scaledAdd(h / 2, k2, wm), wm);
        FlowState k4 = detail::flowRhs(a, t + h, st.scaledAdd(h, k3, wm), wm);
        st.x += (h / 6) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
        st.xi += (h / 6) * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi);
        if (wm) st.M = st.M + (h / 6) * (k1.M + 2.0 * k2.M + 2.0 * k3.M + k4.M);
        t = s + dir * T * (k + 1) / steps;
        if ((k + 1) % opt.storeEvery == 0 || k + 1 == steps) record(t);
    }
    return traj;
}

// symplectic defect ||M^T J M - J|| of the forward Jacobian at sample i
inline real symplecticDefect(const PhaseTrajectory& traj, std::size_t i) {
    int n = traj.n;
    const Mat& M = traj.jac.at(i);
    Mat J(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        J(k, n + k) = 1;
        J(n + k, k) = -1;
    }
    Mat D = M.transposed() * J * M - J;
    return D.maxAbs();
}

struct MixedJacobian {
    Mat xt_xs, xt_xit, xis_xs, xis_xit;  // blocks of d(x_t, xi_s)/d(x_s, xi_t)
    real conditionD = 1;                 // conditioning of the eliminated block
};

// forward blocks M = [[A, B], [C, D]] -> mixed parametrization via D^{-1}
inline MixedJacobian mixedJacobian(const PhaseTrajectory& traj, std::size_t i) {
    int n = traj.n;
    const Mat& M = traj.jac.at(i);
    Mat A(n, n), B(n, n), C(n, n), D(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            A(r, c) = M(r, c);
            B(r, c) = M(r, n + c);
            C(r, c) = M(n + r, c);
            D(r, c) = M(n + r, n + c);
        }
    Mat Dinv = inverse(D);
    MixedJacobian out;
    out.xt_xs = A - B * Dinv * C;
    out.xt_xit = B * Dinv;
    out.xis_xs = (-1.0) * (Dinv * C);
    out.xis_xit = Dinv;
    real n1 = 0, n2 = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            n1 = std::max(n1, std::abs(D(r, c)));
            n2 = std::max(n2, std::abs(Dinv(r, c)));
        }
    out.conditionD = n1 * n2 * n;
    return out;
}

// psi(t) = int_s^t b(sigma, x_sigma, xi_sigma) dsigma by trapezoid; b >= 0
template <class BFn>
inline std::vector<real> psiAlongFlow(const BFn& b, const PhaseTrajectory& traj) {
    std::vector<real> psi(traj.count(), 0.0);
    real prev = b(traj.times[0], traj.x[0], traj.xi[0]);
    if (prev < -1e-12) throw std::runtime_error("psiAlongFlow: negative damping sample");
    for (std::size_t i = 1; i < traj.count(); ++i) {
        real cur = b(traj.times[i], traj.x[i], traj.xi[i]);
        if (cur < -1e-12) throw std::runtime_error("psiAlongFlow: negative damping sample");
        psi[i] = psi[i - 1] + 0.5 * (prev + cur) * (traj.times[i] - traj.times[i - 1]);
        prev = cur;
    }
    return psi;
}

}  // namespace outwave
