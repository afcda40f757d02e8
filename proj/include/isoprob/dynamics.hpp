#pragma once

// Two-level Schroedinger propagation in the detuning picture
//
//   i dc/dx = [[-beta g, alpha f], [alpha f, beta g]] c
//
// or in the phase picture, where the detuning is carried by the drive phase
// phi(x) = 2 beta * phase_shape(x):
//
//   i db/dx = [[0, alpha f e^{-i phi}], [alpha f e^{i phi}, 0]] b,
//
// with c = diag(e^{i phi/2}, e^{-i phi/2}) b.

#include <array>
#include <complex>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "isoprob/catalog.hpp"

namespace isoprob {

using Complex = std::complex<double>;

struct QubitState {
    Complex c1{1.0, 0.0};
    Complex c2{0.0, 0.0};

    double excited_population() const { return std::norm(c2); }
    double norm() const { return std::norm(c1) + std::norm(c2); }
};

/// 2x2 evolution operator, u[row][col].
struct Propagator {
    std::array<std::array<Complex, 2>, 2> u{{{Complex{1.0}, Complex{0.0}}, {Complex{0.0}, Complex{1.0}}}};

    static Propagator identity() { return {}; }
    QubitState apply(const QubitState& c) const;
    /// max-norm of u^dagger u - I.
    double unitarity_error() const;
    /// |u_10|^2: transition probability from the ground state.
    double transition_probability() const { return std::norm(u[1][0]); }
};

Propagator operator*(const Propagator& a, const Propagator& b);

enum class Picture { detuning, phase };

std::string_view to_string(Picture p);
Picture parse_picture(std::string_view name);

struct IntegratorConfig {
    enum class Mode { adaptive, fixed_step };

    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    long max_steps = 2'000'000;
    Mode mode = Mode::adaptive;
    long fixed_steps = 20'000;  // step count in fixed-step mode

    void validate() const;
};

struct Span {
    double begin = 0.0;
    double end = 0.0;
};

/// Ground-state trajectory sample, one per accepted step.
struct TrajectoryPoint {
    double x = 0.0;
    Complex c1;
    Complex c2;
};
using Trajectory = std::vector<TrajectoryPoint>;

/// The model's effective (truncated) domain.
Span default_span(const ModelPair& model);

Propagator propagate_detuning(const ModelPair& model, Span span, const IntegratorConfig& cfg = {},
                              Trajectory* trajectory = nullptr);
Propagator propagate_phase(const ModelPair& model, Span span, const IntegratorConfig& cfg = {},
                           Trajectory* trajectory = nullptr);
Propagator propagate(const ModelPair& model, Picture picture, Span span, const IntegratorConfig& cfg = {},
                     Trajectory* trajectory = nullptr);

/// |c2|^2 at the end of the effective domain, starting from (1, 0).
double transition_probability(const ModelPair& model, Picture picture, const IntegratorConfig& cfg = {});

/// diag(e^{i phi/2}, e^{-i phi/2}) at x: maps phase-picture amplitudes to detuning-picture ones.
Propagator phase_frame(const ModelPair& model, double x);

/// For endpoint-guarded models: |P(delta) - P(delta/2)|. Zero for other policies.
double guard_error_estimate(const ModelPair& model, Picture picture, const IntegratorConfig& cfg = {});

/// Columns x, Re c1, Im c1, Re c2, Im c2, |c2|^2.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace isoprob
