// Basic scalar types, small vectors/matrices with runtime dimension n <= 3,
// and the smooth transition profiles used throughout (log-scale raised cosine,
// polynomial smoothstep).
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace outwave {

using real = double;
using cplx = std::complex<double>;

inline constexpr real pi = 3.14159265358979323846;

// Fixed-capacity vector for spatial/frequency points, dimension 1..3.
struct Vec {
    int n = 0;
    std::array<real, 3> v{0, 0, 0};

    Vec() = default;
    explicit Vec(int dim) : n(dim) {}
    Vec(int dim, real a, real b = 0, real c = 0) : n(dim), v{a, b, c} {}

    real& operator[](int i) { return v[i]; }
    real operator[](int i) const { return v[i]; }

    Vec& operator+=(const Vec& o) { for (int i = 0; i < n; ++i) v[i] += o.v[i]; return *this; }
    Vec& operator-=(const Vec& o) { for (int i = 0; i < n; ++i) v[i] -= o.v[i]; return *this; }
    Vec& operator*=(real s) { for (int i = 0; i < n; ++i) v[i] *= s; return *this; }

    friend Vec operator+(Vec a, const Vec& b) { a += b; return a; }
    friend Vec operator-(Vec a, const Vec& b) { a -= b; return a; }
    friend Vec operator*(real s, Vec a) { a *= s; return a; }

    real dot(const Vec& o) const { real s = 0; for (int i = 0; i < n; ++i) s += v[i] * o.v[i]; return s; }
    real norm2() const { return dot(*this); }
    real norm() const { return std::sqrt(norm2()); }
};

// Small dense matrix, up to 6x6 (linearized flow in n<=3 needs 2n x 2n).
struct Mat {
    int rows = 0, cols = 0;
    std::array<real, 36> a{};

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c) { a.fill(0); }
    static Mat identity(int m) { Mat I(m, m); for (int i = 0; i < m; ++i) I(i, i) = 1; return I; }

    real& operator()(int i, int j) { return a[i * cols + j]; }
    real operator()(int i, int j) const { return a[i * cols + j]; }

    friend Mat operator*(const Mat& A, const Mat& B) {
        Mat C(A.rows, B.cols);
        for (int i = 0; i < A.rows; ++i)
            for (int k = 0; k < A.cols; ++k) {
                real aik = A(i, k);
                if (aik == 0) continue;
                for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
            }
        return C;
    }
    friend Mat operator+(Mat A, const Mat& B) {
        for (int i = 0; i < A.rows * A.cols; ++i) A.a[i] += B.a[i];
        return A;
    }
    friend Mat operator-(Mat A, const Mat& B) {
        for (int i = 0; i < A.rows * A.cols; ++i) A.a[i] -= B.a[i];
        return A;
    }
    friend Mat operator*(real s, Mat A) { for (auto& x : A.a) x *= s; return A; }

    Mat transposed() const {
        Mat T(cols, rows);
        for (int i = 0; i < rows; ++i) for (int j = 0; j < cols; ++j) T(j, i) = (*this)(i, j);
        return T;
    }
    real frob() const { real s = 0; for (int i = 0; i < rows * cols; ++i) s += a[i] * a[i]; return std::sqrt(s); }
    real maxAbs() const { real s = 0; for (int i = 0; i < rows * cols; ++i) s = std::max(s, std::abs(a[i])); return s; }
};

// Gauss-Jordan inverse with partial pivoting; throws on (near) singular input.
inline Mat inverse(Mat A) {
    if (A.rows != A.cols) throw std::invalid_argument("inverse: non-square");
    int m = A.rows;
    Mat I = Mat::identity(m);
    for (int c = 0; c < m; ++c) {
        int p = c;
        for (int r = c + 1; r < m; ++r)
            if (std::abs(A(r, c)) > std::abs(A(p, c))) p = r;
        if (std::abs(A(p, c)) < 1e-300) throw std::runtime_error("inverse: singular matrix");
        if (p != c)
            for (int j = 0; j < m; ++j) { std::swap(A(p, j), A(c, j)); std::swap(I(p, j), I(c, j)); }
        real d = A(c, c);
        for (int j = 0; j < m; ++j) { A(c, j) /= d; I(c, j) /= d; }
        for (int r = 0; r < m; ++r) {
            if (r == c) continue;
            real f = A(r, c);
            if (f == 0) continue;
            for (int j = 0; j < m; ++j) { A(r, j) -= f * A(c, j); I(r, j) -= f * I(c, j); }
        }
    }
    return I;
}

// --- smooth transition profiles ---------------------------------------------

// Raised-cosine step: 0 on (-inf,0], 1 on [1,inf), C^1.
inline real cosstep(real u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    return 0.5 * (1 - std::cos(pi * u));
}

// Quintic smoothstep: C^2, used for the damping cutoff phi.
inline real smoothstep5(real u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    return u * u * u * (10 + u * (-15 + 6 * u));
}

// Order-9 smoothstep: C^4; harmonic expansions of cutoffs built from it
// converge fast enough for sup-norm partition tolerances.
inline real smoothstep9(real u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    real u5 = u * u * u * u * u;
    return u5 * (126 + u * (-420 + u * (540 + u * (-315 + 70 * u))));
}
inline real smoothstep5_d(real u) {
    if (u <= 0 || u >= 1) return 0;
    return u * u * (30 + u * (-60 + 30 * u));
}

// Step in log2 scale: 0 for s <= 2^a, 1 for s >= 2^(a+w), raised cosine in
// log2 s across w octaves. Value, d/ds and d2/ds2 available.
struct LogStep {
    real a = 0;  // start octave
    real w = 1;  // width in octaves

    real operator()(real s) const {
        if (s <= 0) return 0;
        return cosstep((std::log2(s) - a) / w);
    }
    real deriv(real s) const {
        if (s <= 0) return 0;
        real u = (std::log2(s) - a) / w;
        if (u <= 0 || u >= 1) return 0;
        return 0.5 * pi * std::sin(pi * u) / (w * std::log(2.0) * s);
    }
    real deriv2(real s) const {
        if (s <= 0) return 0;
        real L2 = std::log(2.0);
        real u = (std::log2(s) - a) / w;
        if (u <= 0 || u >= 1) return 0;
        real du = 1 / (w * L2 * s);
        return 0.5 * pi * pi * std::cos(pi * u) * du * du - 0.5 * pi * std::sin(pi * u) * du / s;
    }
};

inline real sq(real x) { return x * x; }

}  // namespace outwave
