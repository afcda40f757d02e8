#pragma once

// Pulse-shape library and isoprobability class construction.
//
// Every quantity here is expressed in the dimensionless time x = t/tau.
// A shape f(x) has area pi over its domain and s(x) = int_0^x f. A class
// member pairs f with a detuning shape g(x) and a phase shape
// phi(x) / (delta0 * tau), both fixed by the class generator:
//
//   LMSZ:  g = f * s,        phase = s^2 / 2
//   AEH:   g = f * tan(s),   phase = -ln cos(s)

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace isoprob {

using RealFn = std::function<double(double)>;

enum class ModelClass { lmsz, aeh };

std::string_view to_string(ModelClass c);
ModelClass parse_model_class(std::string_view name);

struct Domain {
    bool infinite = false;
    double half_width = 0.0;  // finite domains are [-half_width, half_width]

    static Domain finite(double half_width) { return {false, half_width}; }
    static Domain unbounded() { return {true, 0.0}; }
};

/// Outcome of checking a shape against the area and derivative contracts.
struct ShapeAudit {
    int row = 0;
    std::string name;
    double area = 0.0;             // quadrature of f over the domain
    double area_error = 0.0;       // |area - pi|
    bool closed_s_offered = false;
    double closed_s_error = 0.0;   // max |ds/dx - f| of the offered closed form
    bool closed_s_used = false;    // false: s comes from quadrature of f
    double s_error = 0.0;          // max |ds/dx - f| of the s actually in use
    double symmetry_error = 0.0;   // max of |f(-x) - f(x)|, |s(-x) + s(x)|
};

/// Symmetric envelope f with its running integral s. Cheap to copy; the
/// underlying tables are shared and immutable.
class PulseShape {
public:
    /// Builds a shape. When `closed_s` is given it is audited against f at
    /// 64 probe points and replaced by quadrature if it fails.
    static PulseShape make(std::string name, std::string formula, Domain domain, RealFn f,
                           std::optional<RealFn> closed_s = std::nullopt, int row = 0);

    double f(double x) const;
    double s(double x) const;
    const Domain& domain() const;
    const std::string& name() const;
    const std::string& formula() const;
    int row() const;
    double area() const;
    bool closed_s() const;
    const ShapeAudit& audit() const;

    /// x > 0 where the one-sided tail area area/2 - s(x) equals eps.
    double tail_point(double eps) const;

    /// Copy with f scaled so the area is exactly pi.
    PulseShape renormalized() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// The 64 interior probe abscissae used by every pointwise audit.
std::vector<double> probe_points(double lo, double hi, int count = 64);

/// Shapes of the model catalog, rows 1..16.
PulseShape catalog_shape(int row);
std::vector<ShapeAudit> audit_catalog();

struct TruncationPolicy {
    enum class Kind { none, tail_area, window, endpoint_guard };
    Kind kind = Kind::none;
    double value = 0.0;  // eps per side | window width T/tau | guard delta

    static TruncationPolicy full() { return {Kind::none, 0.0}; }
    static TruncationPolicy tail_area(double eps) { return {Kind::tail_area, eps}; }
    static TruncationPolicy window(double t_over_tau) { return {Kind::window, t_over_tau}; }
    static TruncationPolicy endpoint_guard(double delta) { return {Kind::endpoint_guard, delta}; }
};

std::string describe(const TruncationPolicy& p);

inline constexpr double kDefaultTailEps = 1e-8;
inline constexpr double kDefaultGuard = 1e-3 * 1.5707963267948966;

struct Truncation {
    TruncationPolicy policy;
    double x_lo = 0.0;
    double x_hi = 0.0;
    double area_deficit = 0.0;  // pulse area left outside [x_lo, x_hi]
};

/// Rabi frequency, detuning and phase at one instant.
struct DriveSample {
    double omega = 0.0;  // rad / unit time
    double delta = 0.0;  // rad / unit time
    double phi = 0.0;    // rad
};

/// Stueckelberg generator of a class, in physical units.
struct StueckelbergClass {
    ModelClass tag = ModelClass::lmsz;
    double omega0 = 0.0;
    double delta0 = 0.0;
    double tau = 1.0;

    double theta(double sigma) const;
    double phase(double sigma) const;
};

/// A class member {Omega(t), Delta(t), phi(t)}.
struct ModelPair {
    PulseShape shape;
    ModelClass cls = ModelClass::lmsz;
    double omega0 = 0.0;
    double delta0 = 0.0;
    double tau = 1.0;
    RealFn g;            // detuning shape
    RealFn phase_shape;  // phi / (delta0 * tau)
    Truncation truncation;
    bool pole_at_edges = false;
    bool g_from_table = false;  // printed closed form in use (passed audit)

    double alpha() const { return 0.5 * omega0 * tau; }
    double beta() const { return 0.5 * delta0 * tau; }
    double sigma(double x) const { return omega0 * tau * shape.s(x); }
    DriveSample sample(double x) const;
    StueckelbergClass generator() const;

    /// Same member with new amplitudes. Truncation is independent of them.
    ModelPair with_amplitudes(double omega0, double delta0) const;
    /// Same member addressed by the dimensionless class parameters (tau = 1).
    ModelPair with_class_parameters(double alpha, double beta) const;
};

/// Check of a printed closed-form (g, phase) against the composed class form.
struct PairAudit {
    ModelClass cls = ModelClass::lmsz;
    int row = 0;
    double g_error = 0.0;      // max relative deviation at probe points
    double phase_error = 0.0;
    bool printed_used = false;
};

/// Audits every row whose printed detuning/phase differs from the generic
/// composition. Rows that fail use the composed form in catalog_model.
std::vector<PairAudit> audit_printed_pairs();

/// Catalog row in either class with the default truncation applied.
ModelPair catalog_model(ModelClass cls, int row, double omega0, double delta0, double tau);

/// Class member generated from a Rabi-frequency shape.
ModelPair pair_from_shape(ModelClass cls, const PulseShape& shape, double omega0, double delta0,
                          double tau);

struct DetuningShape {
    RealFn g;
    Domain domain;
    std::string name = "custom";
};

struct SigmaSeed {
    double x0 = 1e-3;                // series expansion used on |x| < x0
    std::optional<double> slope;     // g'(0); estimated by differences if absent
    double tail_eps = 1e-10;         // stop once the remaining area per side is below this
    double x_max = 200.0;            // search limit for unbounded detunings
    double node_spacing = 1.0 / 256; // tabulation step of s(x)
    double guard = kDefaultGuard;    // AEH on a finite domain stops this far from the edge
};

/// Class member generated from a detuning shape by integrating
/// s'(x) * theta(s) = g(x) outward from x = 0.
ModelPair pair_from_detuning(ModelClass cls, const DetuningShape& detuning, double omega0,
                             double delta0, double tau, const SigmaSeed& seed = {});

/// Applies a truncation policy; infinite shapes need one before propagation.
ModelPair truncate(const ModelPair& model, const TruncationPolicy& policy);
TruncationPolicy default_truncation(const ModelPair& model);

/// Windows (T/tau) of the hardware runs, for the rows that were measured.
std::optional<double> experimental_window(ModelClass cls, int row);

}  // namespace isoprob
