#include "isoprob/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "isoprob/errors.hpp"

namespace isoprob::analytic {

namespace {

constexpr double kPi = std::numbers::pi;

double sq(double v) { return v * v; }

}  // namespace

double lmsz_asymptotic(double alpha, double beta) {
    if (alpha < 0.0) throw ContractError("alpha must be non-negative");
    if (beta == 0.0)
        throw DomainError("asymptotic LMSZ formula is singular at beta = 0; use rabi_resonant (sin^2(pi alpha))");
    return -std::expm1(-kPi * alpha * alpha / std::fabs(beta));
}

double aeh_exact(double alpha, double beta) {
    if (alpha < 0.0) throw ContractError("alpha must be non-negative");
    const double b = std::fabs(beta);
    const double pb = kPi * b;
    double p;
    if (alpha >= b) {
        // 1 - cos^2(pi r)/cosh^2(pi b) = (sinh^2(pi b) + sin^2(pi r)) / cosh^2(pi b)
        const double r = std::sqrt((alpha - b) * (alpha + b));
        const double sr = sq(boost::math::sin_pi(r));
        if (pb > 20.0) {
            p = 1.0 - sq(boost::math::cos_pi(r)) * sq(2.0 * std::exp(-pb) / (1.0 + std::exp(-2.0 * pb)));
        } else {
            p = (sq(std::sinh(pb)) + sr) / sq(std::cosh(pb));
        }
    } else {
        // 1 - cosh^2(pi r)/cosh^2(pi b), r = sqrt(b^2 - alpha^2) < b
        const double pr = kPi * std::sqrt((b - alpha) * (b + alpha));
        if (pb > 20.0) {
            const double ratio = std::exp(pr - pb) * (1.0 + std::exp(-2.0 * pr)) / (1.0 + std::exp(-2.0 * pb));
            p = 1.0 - ratio * ratio;
        } else {
            p = (sq(std::sinh(pb)) - sq(std::sinh(pr))) / sq(std::cosh(pb));
        }
    }
    return std::clamp(p, 0.0, 1.0);
}

double rabi_resonant(double alpha) {
    if (alpha < 0.0) throw ContractError("alpha must be non-negative");
    return std::clamp(sq(boost::math::sin_pi(alpha)), 0.0, 1.0);
}

}  // namespace isoprob::analytic
