#include "isoprob/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "isoprob/errors.hpp"
#include "isoprob/ode.hpp"

namespace isoprob {

namespace {

// U stored column-major as interleaved (re, im): u00 u10 u01 u11.
using UState = ode::State<8>;

// Hamiltonian entries at one x: real diagonal, complex off-diagonal.
struct Entries {
    double d1, d2;
    Complex up, down;
};

void apply_hamiltonian(const Entries& h, const UState& y, UState& dy) {
    for (int col = 0; col < 2; ++col) {
        const Complex a{y[4 * col + 0], y[4 * col + 1]};
        const Complex b{y[4 * col + 2], y[4 * col + 3]};
        // dU/dx = -i H U
        const Complex ha = h.d1 * a + h.up * b;
        const Complex hb = h.down * a + h.d2 * b;
        dy[4 * col + 0] = ha.imag();
        dy[4 * col + 1] = -ha.real();
        dy[4 * col + 2] = hb.imag();
        dy[4 * col + 3] = -hb.real();
    }
}

[[noreturn]] void non_finite(double x) {
    std::ostringstream os;
    os.precision(17);
    os << "non-finite drive sample at x = " << x;
    throw DomainError(os.str());
}

void check_span(const ModelPair& m, Span span) {
    if (!std::isfinite(span.begin) || !std::isfinite(span.end))
        throw DomainError("propagation span is unbounded; truncate the model first");
    if (span.end < span.begin) throw ContractError("propagation span must have begin <= end");
    const double slack = 1e-12 * std::max(1.0, std::fabs(m.truncation.x_hi - m.truncation.x_lo));
    if (span.begin < m.truncation.x_lo - slack || span.end > m.truncation.x_hi + slack)
        throw ContractError("propagation span lies outside the model's effective domain");
    if (m.pole_at_edges) {
        const double hw = m.shape.domain().half_width;
        const double tiny = 1e-12 * hw;
        if (span.end >= hw - tiny || span.begin <= -hw + tiny) {
            std::ostringstream os;
            os.precision(17);
            os << "detuning and phase diverge at x = " << (span.end >= hw - tiny ? hw : -hw)
               << "; apply an endpoint guard";
            throw DomainError(os.str());
        }
    }
}

template <class HamiltonianAt>
Propagator integrate(HamiltonianAt&& hamiltonian, Span span, const IntegratorConfig& cfg,
                     Trajectory* trajectory) {
    cfg.validate();
    UState y{1, 0, 0, 0, 0, 0, 1, 0};
    auto rhs = [&](double x, const UState& v, UState& dv) { apply_hamiltonian(hamiltonian(x), v, dv); };
    auto observe = [&](double x, const UState& v) {
        if (trajectory) trajectory->push_back({x, Complex{v[0], v[1]}, Complex{v[2], v[3]}});
    };
    if (cfg.mode == IntegratorConfig::Mode::adaptive) {
        ode::AdaptiveOptions opt;
        opt.rel_tol = cfg.rel_tol;
        opt.abs_tol = cfg.abs_tol;
        opt.max_steps = cfg.max_steps;
        // The embedded error estimate can be blind across flat stretches of the
        // drive (x^4 near the center); a step cap keeps it honest.
        opt.max_step = (span.end - span.begin) / 32.0;
        ode::dop853<8>(rhs, span.begin, span.end, y, opt, observe);
    } else {
        ode::rk4<8>(rhs, span.begin, span.end, y, cfg.fixed_steps, observe);
    }
    Propagator p;
    p.u[0][0] = {y[0], y[1]};
    p.u[1][0] = {y[2], y[3]};
    p.u[0][1] = {y[4], y[5]};
    p.u[1][1] = {y[6], y[7]};
    return p;
}

}  // namespace

QubitState Propagator::apply(const QubitState& c) const {
    return {u[0][0] * c.c1 + u[0][1] * c.c2, u[1][0] * c.c1 + u[1][1] * c.c2};
}

double Propagator::unitarity_error() const {
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Complex acc = std::conj(u[0][i]) * u[0][j] + std::conj(u[1][i]) * u[1][j];
            if (i == j) acc -= 1.0;
            worst = std::max({worst, std::fabs(acc.real()), std::fabs(acc.imag())});
        }
    }
    return worst;
}

Propagator operator*(const Propagator& a, const Propagator& b) {
    Propagator r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.u[i][j] = a.u[i][0] * b.u[0][j] + a.u[i][1] * b.u[1][j];
    return r;
}

std::string_view to_string(Picture p) { return p == Picture::detuning ? "detuning" : "phase"; }

Picture parse_picture(std::string_view name) {
    if (name == "detuning") return Picture::detuning;
    if (name == "phase") return Picture::phase;
    throw LookupError("unknown picture '" + std::string(name) + "' (expected detuning or phase)");
}

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ContractError("integrator tolerances must be positive");
    if (max_steps < 2) throw ContractError("max_steps must be at least 2");
    if (mode == Mode::fixed_step && fixed_steps < 1) throw ContractError("fixed_steps must be positive");
}

Span default_span(const ModelPair& model) { return {model.truncation.x_lo, model.truncation.x_hi}; }

Propagator propagate_detuning(const ModelPair& model, Span span, const IntegratorConfig& cfg,
                              Trajectory* trajectory) {
    check_span(model, span);
    const double alpha = model.alpha();
    const double beta = model.beta();
    auto hamiltonian = [&](double x) {
        const double f = model.shape.f(x);
        const double g = beta == 0.0 ? 0.0 : model.g(x);
        if (!std::isfinite(f) || !std::isfinite(g)) non_finite(x);
        const double coupling = alpha * f;
        const double det = beta * g;
        return Entries{-det, det, Complex{coupling, 0.0}, Complex{coupling, 0.0}};
    };
    return integrate(hamiltonian, span, cfg, trajectory);
}

Propagator propagate_phase(const ModelPair& model, Span span, const IntegratorConfig& cfg,
                           Trajectory* trajectory) {
    check_span(model, span);
    const double alpha = model.alpha();
    const double beta = model.beta();
    auto hamiltonian = [&](double x) {
        const double f = model.shape.f(x);
        const double phi = beta == 0.0 ? 0.0 : 2.0 * beta * model.phase_shape(x);
        if (!std::isfinite(f) || !std::isfinite(phi)) non_finite(x);
        const double coupling = alpha * f;
        const double c = std::cos(phi), s = std::sin(phi);
        return Entries{0.0, 0.0, Complex{coupling * c, -coupling * s}, Complex{coupling * c, coupling * s}};
    };
    return integrate(hamiltonian, span, cfg, trajectory);
}

Propagator propagate(const ModelPair& model, Picture picture, Span span, const IntegratorConfig& cfg,
                     Trajectory* trajectory) {
    return picture == Picture::detuning ? propagate_detuning(model, span, cfg, trajectory)
                                        : propagate_phase(model, span, cfg, trajectory);
}

double transition_probability(const ModelPair& model, Picture picture, const IntegratorConfig& cfg) {
    const double p = propagate(model, picture, default_span(model), cfg).transition_probability();
    return std::clamp(p, 0.0, 1.0);
}

Propagator phase_frame(const ModelPair& model, double x) {
    const double phi = 2.0 * model.beta() * model.phase_shape(x);
    Propagator p;
    p.u[0][0] = std::polar(1.0, 0.5 * phi);
    p.u[1][1] = std::polar(1.0, -0.5 * phi);
    return p;
}

double guard_error_estimate(const ModelPair& model, Picture picture, const IntegratorConfig& cfg) {
    if (model.truncation.policy.kind != TruncationPolicy::Kind::endpoint_guard ||
        model.shape.domain().infinite)
        return 0.0;
    const double p = transition_probability(model, picture, cfg);
    const ModelPair halved =
        truncate(model, TruncationPolicy::endpoint_guard(0.5 * model.truncation.policy.value));
    return std::fabs(p - transition_probability(halved, picture, cfg));
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    os << "x,re_c1,im_c1,re_c2,im_c2,p2\n";
    char buf[256];
    for (const auto& pt : trajectory) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", pt.x, pt.c1.real(),
                      pt.c1.imag(), pt.c2.real(), pt.c2.imag(), std::norm(pt.c2));
        os << buf;
    }
}

}  // namespace isoprob
