#pragma once

// Explicit Runge-Kutta integrators for small fixed-size real systems.
//
// dop853() is the Dormand-Prince 8(5,3) embedded pair with Hairer's
// step-size controller; rk4() is the classical fixed-step method, kept for
// bitwise-reproducible runs. Complex systems are integrated as interleaved
// (re, im) pairs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "isoprob/errors.hpp"

namespace isoprob::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct AdaptiveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    long max_steps = 1'000'000;
    double initial_step = 0.0;  // 0: pick automatically
    double max_step = 0.0;      // 0: unlimited
};

struct Stats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
};

struct NoObserver {
    template <std::size_t N>
    void operator()(double, const State<N>&) const {}
};

namespace detail {

inline bool finite(double v) { return std::isfinite(v); }

template <std::size_t N>
double rms_scaled(const State<N>& v, const State<N>& y, const AdaptiveOptions& opt) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sk = opt.abs_tol + opt.rel_tol * std::fabs(y[i]);
        const double r = v[i] / sk;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(N));
}

[[noreturn]] inline void give_up(const char* why, double x) {
    std::ostringstream os;
    os.precision(17);
    os << why << " at x = " << x;
    throw ConvergenceError(os.str(), x);
}

}  // namespace detail

/// Integrates y' = rhs(x, y) from x0 to x1 (x1 > x0) in place.
/// `observe(x, y)` is called once at x0 and after every accepted step.
/// Throws ConvergenceError when max_steps is exhausted or the step underflows.
template <std::size_t N, class Rhs, class Observer = NoObserver>
Stats dop853(Rhs&& rhs, double x0, double x1, State<N>& y, const AdaptiveOptions& opt,
             Observer&& observe = {}) {
    // Hairer & Wanner coefficients (DOP853).
    constexpr double c2 = 0.05260015195876773187856, c3 = 0.07890022793815159781784,
                     c4 = 0.11835034190722739672676, c5 = 0.28164965809277260327324,
                     c6 = 0.33333333333333333333333, c7 = 0.25000000000000000000000,
                     c8 = 0.30769230769230769230769, c9 = 0.65128205128205128205128,
                     c10 = 0.60000000000000000000000, c11 = 0.85714285714285714285714;
    constexpr double b1 = 0.05429373411656876223805, b6 = 4.45031289275240888144114,
                     b7 = 1.89151789931450038304282, b8 = -5.80120396001058478146721,
                     b9 = 0.31116436695781989440892, b10 = -0.15216094966251607855618,
                     b11 = 0.20136540080403034837478, b12 = 0.04471061572777259051769;
    constexpr double bhh1 = 0.24409448818897637795276, bhh2 = 0.73384668828161185734136,
                     bhh3 = 0.02205882352941176470588;
    constexpr double er1 = 0.01312004499419488073250, er6 = -1.22515644637620444072057,
                     er7 = -0.49575894965725019152141, er8 = 1.66437718245498653696153,
                     er9 = -0.35032884874997368168865, er10 = 0.33417911871301747902973,
                     er11 = 0.08192320648511571246571, er12 = -0.02235530786388629525884;
    constexpr double a21 = 0.05260015195876773187856;
    constexpr double a31 = 0.01972505698453789945446, a32 = 0.05917517095361369836338;
    constexpr double a41 = 0.02958758547680684918169, a43 = 0.08876275643042054754507;
    constexpr double a51 = 0.24136513415926668550237, a53 = -0.88454947932828608534486,
                     a54 = 0.92483400326179200311574;
    constexpr double a61 = 0.03703703703703703703704, a64 = 0.17082860872947387127960,
                     a65 = 0.12546768756682242501669;
    constexpr double a71 = 0.03710937500000000000000, a74 = 0.17025221101954403931498,
                     a75 = 0.06021653898045596068502, a76 = -0.01757812500000000000000;
    constexpr double a81 = 0.03709200011850479271088, a84 = 0.17038392571223999381021,
                     a85 = 0.10726203044637328465181, a86 = -0.01531943774862440175279,
                     a87 = 0.00827378916381402288758;
    constexpr double a91 = 0.62411095871607571711443, a94 = -3.36089262944694129406857,
                     a95 = -0.86821934684172600681819, a96 = 27.5920996994467083049416,
                     a97 = 20.1540675504778934086187, a98 = -43.4898841810699588477366;
    constexpr double a101 = 0.47766253643826436589043, a104 = -2.48811461997166764192642,
                     a105 = -0.59029082683684299637145, a106 = 21.2300514481811942347289,
                     a107 = 15.2792336328824235832597, a108 = -33.2882109689848629194453,
                     a109 = -0.02033120170850862613582;
    constexpr double a111 = -0.93714243008598732571704, a114 = 5.18637242884406370830024,
                     a115 = 1.09143734899672957818500, a116 = -8.14978701074692612513997,
                     a117 = -18.5200656599969598641566, a118 = 22.7394870993505042818970,
                     a119 = 2.49360555267965238987089, a1110 = -3.04676447189821950038237;
    constexpr double a121 = 2.27331014751653820792360, a124 = -10.5344954667372501984067,
                     a125 = -2.00087205822486249909676, a126 = -17.9589318631187989172766,
                     a127 = 27.9488845294199600508500, a128 = -2.85899827713502369474066,
                     a129 = -8.87285693353062954433549, a1210 = 12.3605671757943030647266,
                     a1211 = 0.64339274601576353035597;
    constexpr double safe = 0.9, fac_min = 0.333, fac_max = 6.0, beta_ctrl = 0.0;

    Stats st;
    observe(x0, y);
    if (!(x1 > x0)) return st;

    State<N> k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, tmp, incr, ynew;
    auto eval = [&](double x, const State<N>& v, State<N>& out) {
        rhs(x, v, out);
        ++st.evaluations;
    };
    auto stage = [&](auto&& combo) {
        for (std::size_t i = 0; i < N; ++i) tmp[i] = combo(i);
    };

    eval(x0, y, k1);

    const double span = x1 - x0;
    double h = opt.initial_step;
    if (h <= 0.0) {
        // Hairer's starting-step heuristic.
        const double dnf = detail::rms_scaled<N>(k1, y, opt);
        const double dny = detail::rms_scaled<N>(y, y, opt);
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
        h = std::min(h, span);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k1[i];
        eval(x0 + h, tmp, k2);
        State<N> d2;
        for (std::size_t i = 0; i < N; ++i) d2[i] = (k2[i] - k1[i]) / h;
        const double der2 = detail::rms_scaled<N>(d2, y, opt);
        const double der12 = std::max(der2, dnf);
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
        h = std::min({100.0 * h, h1, span});
    }
    const double h_max = opt.max_step > 0.0 ? opt.max_step : span;
    h = std::min(h, h_max);

    double x = x0;
    double fac_old = 1e-4;
    bool last_rejected = false;
    while (x < x1) {
        if (x + 0.1 * (x1 - x) == x) {
            // Remainder below the resolution of x: one Euler step closes the gap.
            eval(x, y, k1);
            for (std::size_t i = 0; i < N; ++i) y[i] += (x1 - x) * k1[i];
            x = x1;
            ++st.accepted;
            observe(x, y);
            break;
        }
        if (st.accepted + st.rejected >= opt.max_steps)
            detail::give_up("step budget exhausted", x);
        if (!(h > 0.0) || x + 0.1 * h == x || !detail::finite(h))
            detail::give_up("step size underflow", x);
        bool last = false;
        if (x + h >= x1 || x + 1.01 * h >= x1) {
            h = x1 - x;
            last = true;
        }

        stage([&](std::size_t i) { return y[i] + h * a21 * k1[i]; });
        eval(x + c2 * h, tmp, k2);
        stage([&](std::size_t i) { return y[i] + h * (a31 * k1[i] + a32 * k2[i]); });
        eval(x + c3 * h, tmp, k3);
        stage([&](std::size_t i) { return y[i] + h * (a41 * k1[i] + a43 * k3[i]); });
        eval(x + c4 * h, tmp, k4);
        stage([&](std::size_t i) { return y[i] + h * (a51 * k1[i] + a53 * k3[i] + a54 * k4[i]); });
        eval(x + c5 * h, tmp, k5);
        stage([&](std::size_t i) { return y[i] + h * (a61 * k1[i] + a64 * k4[i] + a65 * k5[i]); });
        eval(x + c6 * h, tmp, k6);
        stage([&](std::size_t i) {
            return y[i] + h * (a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        });
        eval(x + c7 * h, tmp, k7);
        stage([&](std::size_t i) {
            return y[i] + h * (a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i] + a87 * k7[i]);
        });
        eval(x + c8 * h, tmp, k8);
        stage([&](std::size_t i) {
            return y[i] + h * (a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i] + a97 * k7[i] +
                               a98 * k8[i]);
        });
        eval(x + c9 * h, tmp, k9);
        stage([&](std::size_t i) {
            return y[i] + h * (a101 * k1[i] + a104 * k4[i] + a105 * k5[i] + a106 * k6[i] +
                               a107 * k7[i] + a108 * k8[i] + a109 * k9[i]);
        });
        eval(x + c10 * h, tmp, k10);
        stage([&](std::size_t i) {
            return y[i] + h * (a111 * k1[i] + a114 * k4[i] + a115 * k5[i] + a116 * k6[i] +
                               a117 * k7[i] + a118 * k8[i] + a119 * k9[i] + a1110 * k10[i]);
        });
        eval(x + c11 * h, tmp, k11);
        stage([&](std::size_t i) {
            return y[i] + h * (a121 * k1[i] + a124 * k4[i] + a125 * k5[i] + a126 * k6[i] +
                               a127 * k7[i] + a128 * k8[i] + a129 * k9[i] + a1210 * k10[i] +
                               a1211 * k11[i]);
        });
        const double x_end = last ? x1 : x + h;
        eval(x_end, tmp, k12);

        for (std::size_t i = 0; i < N; ++i) {
            incr[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] +
                      b10 * k10[i] + b11 * k11[i] + b12 * k12[i];
            ynew[i] = y[i] + h * incr[i];
        }

        double err = 0.0, err2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = opt.abs_tol + opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            double e = (incr[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i]) / sk;
            err2 += e * e;
            e = (er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] +
                 er10 * k10[i] + er11 * k11[i] + er12 * k12[i]) / sk;
            err += e * e;
        }
        double deno = err + 0.01 * err2;
        if (deno <= 0.0) deno = 1.0;
        err = std::fabs(h) * err / std::sqrt(deno * static_cast<double>(N));
        if (!detail::finite(err)) {
            // Typically a stage landed on a singular drive value; shrink hard.
            ++st.rejected;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        const double fac11 = std::pow(err, 0.125 - 0.2 * beta_ctrl);
        double fac = fac11 / std::pow(fac_old, beta_ctrl);
        fac = std::max(1.0 / fac_max, std::min(1.0 / fac_min, fac / safe));
        double h_new = h / fac;

        if (err <= 1.0) {
            fac_old = std::max(err, 1e-4);
            ++st.accepted;
            eval(x_end, ynew, k4);  // FSAL
            k1 = k4;
            y = ynew;
            x = x_end;
            observe(x, y);
            if (last_rejected) h_new = std::min(h_new, h);
            last_rejected = false;
            h = std::min(h_new, h_max);
        } else {
            h_new = h / std::min(1.0 / fac_min, fac11 / safe);
            last_rejected = true;
            ++st.rejected;
            h = h_new;
        }
    }
    return st;
}

/// Classical RK4 with `steps` equal steps from x0 to x1.
template <std::size_t N, class Rhs, class Observer = NoObserver>
Stats rk4(Rhs&& rhs, double x0, double x1, State<N>& y, long steps, Observer&& observe = {}) {
    if (steps < 1) throw ContractError("rk4: steps must be positive");
    Stats st;
    observe(x0, y);
    if (!(x1 > x0)) return st;
    const double h = (x1 - x0) / static_cast<double>(steps);
    State<N> k1, k2, k3, k4, tmp;
    for (long n = 0; n < steps; ++n) {
        const double x = x0 + static_cast<double>(n) * h;
        rhs(x, y, k1);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(x + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(x + 0.5 * h, tmp, k3);
        const double xn = (n + 1 == steps) ? x1 : x + h;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(xn, tmp, k4);
        for (std::size_t i = 0; i < N; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        st.evaluations += 4;
        ++st.accepted;
        observe(xn, y);
    }
    return st;
}

}  // namespace isoprob::ode
