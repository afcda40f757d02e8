#pragma once

// Reference computations that share no code with the library: a product of
// exact 2x2 exponentials at cell midpoints, Richardson-extrapolated, and a few
// closed forms.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

using cplx = std::complex<double>;

// Traceless Hermitian H = [[-d, w], [conj(w), d]] at x.
struct H {
    double d;
    cplx w;
};

// |c2|^2 after the midpoint-exponential product with n cells, starting from (1, 0).
inline double midpoint_product(const std::function<H(double)>& h, double lo, double hi, int n) {
    cplx c1{1.0, 0.0}, c2{0.0, 0.0};
    const double dx = (hi - lo) / n;
    for (int k = 0; k < n; ++k) {
        const H m = h(lo + (k + 0.5) * dx);
        const double om = std::sqrt(m.d * m.d + std::norm(m.w));
        const double th = om * dx;
        const double cs = std::cos(th);
        const double sn = om > 0 ? std::sin(th) / om : dx;
        const cplx i{0.0, 1.0};
        // exp(-i H dx) = cos(th) I - i sin(th)/om H
        const cplx n1 = cs * c1 - i * sn * (-m.d * c1 + m.w * c2);
        const cplx n2 = cs * c2 - i * sn * (std::conj(m.w) * c1 + m.d * c2);
        c1 = n1;
        c2 = n2;
    }
    return std::norm(c2);
}

// Second-order scheme extrapolated from n and 2n cells.
inline double transition(const std::function<H(double)>& h, double lo, double hi, int n = 40000) {
    const double p1 = midpoint_product(h, lo, hi, n);
    const double p2 = midpoint_product(h, lo, hi, 2 * n);
    return (4.0 * p2 - p1) / 3.0;
}

// Detuning picture Hamiltonian for envelope f and detuning shape g.
inline std::function<H(double)> detuning_picture(std::function<double(double)> f,
                                                 std::function<double(double)> g, double alpha,
                                                 double beta) {
    return [=](double x) { return H{beta * g(x), cplx{alpha * f(x), 0.0}}; };
}

inline double sech(double x) { return 1.0 / std::cosh(x); }

// 1 - cos^2(pi sqrt(a^2 - b^2)) / cosh^2(pi b), with the cosh continuation, written plainly.
inline double aeh(double a, double b) {
    const double pi = std::numbers::pi;
    const double d = a * a - b * b;
    const double c = d >= 0 ? std::cos(pi * std::sqrt(d)) : std::cosh(pi * std::sqrt(-d));
    const double ch = std::cosh(pi * b);
    return 1.0 - c * c / (ch * ch);
}

}  // namespace oracle
