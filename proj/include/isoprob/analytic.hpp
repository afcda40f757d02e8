#pragma once

// Closed-form transition probabilities in the class parameters
// alpha = omega0 tau / 2 and beta = delta0 tau / 2.

namespace isoprob::analytic {

/// Long-duration limit of the linear-crossing model: 1 - exp(-pi alpha^2 / |beta|).
/// Throws DomainError at beta = 0; use rabi_resonant there.
double lmsz_asymptotic(double alpha, double beta);

/// Exact AEH result 1 - cos^2(pi sqrt(alpha^2 - beta^2)) / cosh^2(pi beta),
/// continued through cos(i y) = cosh(y) when |beta| > alpha. Total and even in beta.
double aeh_exact(double alpha, double beta);

/// sin^2(pi alpha); equals aeh_exact(alpha, 0) bit for bit.
double rabi_resonant(double alpha);

}  // namespace isoprob::analytic
