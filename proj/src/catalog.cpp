#include "isoprob/catalog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isoprob/errors.hpp"
#include "isoprob/ode.hpp"

namespace isoprob {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kProbeHalfWidthUnbounded = 10.0;
constexpr double kAuditTolerance = 1e-6;

double sech(double x) { return 1.0 / std::cosh(x); }

double integrate(const RealFn& f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

// Cubic Hermite interpolation of an odd running integral from nodes on x >= 0.
class HermiteTable {
public:
    HermiteTable(std::vector<double> x, std::vector<double> s, std::vector<double> ds)
        : x_(std::move(x)), s_(std::move(s)), ds_(std::move(ds)) {}

    double end() const { return x_.back(); }

    double operator()(double x) const {
        if (x < 0.0) return -(*this)(-x);
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        if (k + 1 >= x_.size()) k = x_.size() - 2;
        const double h = x_[k + 1] - x_[k];
        const double t = (x - x_[k]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * s_[k] + (t3 - 2 * t2 + t) * h * ds_[k] +
               (-2 * t3 + 3 * t2) * s_[k + 1] + (t3 - t2) * h * ds_[k + 1];
    }

private:
    std::vector<double> x_, s_, ds_;
};

// s(x) by cumulative Gauss-Legendre on a uniform grid, direct quadrature past its end.
RealFn quadrature_integral(const RealFn& f, const Domain& domain) {
    using boost::math::quadrature::gauss;
    const double end = domain.infinite ? 64.0 : domain.half_width;
    const std::size_t cells = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(end * 512)));
    const double h = end / static_cast<double>(cells);
    std::vector<double> xs(cells + 1), ss(cells + 1), fs(cells + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= cells; ++k) {
        xs[k] = k == cells ? end : h * static_cast<double>(k);
        if (k > 0) acc += gauss<double, 10>::integrate(f, xs[k - 1], xs[k]);
        ss[k] = acc;
        fs[k] = f(xs[k]);
    }
    auto table = std::make_shared<HermiteTable>(std::move(xs), std::move(ss), std::move(fs));
    const double s_end = acc;
    return [table, f, end, s_end](double x) {
        const double ax = std::fabs(x);
        double v = ax <= end ? (*table)(ax) : s_end + integrate(f, end, ax);
        return x < 0 ? -v : v;
    };
}

double max_derivative_error(const RealFn& f, const RealFn& s, double lo, double hi) {
    double worst = 0.0;
    for (double x : probe_points(lo, hi)) {
        const double h = 1e-5 * std::max(1.0, std::fabs(x));
        const double d = (s(x + h) - s(x - h)) / (2 * h);
        worst = std::max(worst, std::fabs(d - f(x)));
    }
    return worst;
}

std::pair<double, double> probe_range(const Domain& d) {
    const double w = d.infinite ? kProbeHalfWidthUnbounded : d.half_width;
    return {-w, w};
}

}  // namespace

std::string_view to_string(ModelClass c) { return c == ModelClass::lmsz ? "lmsz" : "aeh"; }

ModelClass parse_model_class(std::string_view name) {
    if (name == "lmsz" || name == "LMSZ") return ModelClass::lmsz;
    if (name == "aeh" || name == "AEH") return ModelClass::aeh;
    throw LookupError("unknown model class '" + std::string(name) + "' (expected lmsz or aeh)");
}

std::vector<double> probe_points(double lo, double hi, int count) {
    std::vector<double> xs(static_cast<std::size_t>(count));
    const double w = (hi - lo) / count;
    for (int k = 0; k < count; ++k) xs[static_cast<std::size_t>(k)] = lo + (k + 0.5) * w;
    return xs;
}

// ---------------------------------------------------------------------------
// PulseShape

struct PulseShape::Impl {
    std::string name;
    std::string formula;
    Domain domain;
    RealFn f;
    RealFn s;
    int row = 0;
    double area = 0.0;
    ShapeAudit audit;
};

PulseShape PulseShape::make(std::string name, std::string formula, Domain domain, RealFn f,
                            std::optional<RealFn> closed_s, int row) {
    if (!domain.infinite && !(domain.half_width > 0.0))
        throw ContractError("shape '" + name + "': finite domain needs a positive half width");
    auto impl = std::make_shared<Impl>();
    impl->name = std::move(name);
    impl->formula = std::move(formula);
    impl->domain = domain;
    impl->f = std::move(f);
    impl->row = row;

    const double upper = domain.infinite ? std::numeric_limits<double>::infinity() : domain.half_width;
    impl->area = 2.0 * integrate(impl->f, 0.0, upper);

    ShapeAudit& a = impl->audit;
    a.row = row;
    a.name = impl->name;
    a.area = impl->area;
    a.area_error = std::fabs(impl->area - kPi);

    const auto [lo, hi] = probe_range(domain);
    if (closed_s) {
        a.closed_s_offered = true;
        a.closed_s_error = max_derivative_error(impl->f, *closed_s, lo, hi);
        a.closed_s_error = std::max(a.closed_s_error, std::fabs((*closed_s)(0.0)));
        a.closed_s_used = a.closed_s_error <= kAuditTolerance;
    }
    impl->s = a.closed_s_used ? *closed_s : quadrature_integral(impl->f, domain);
    a.s_error = a.closed_s_used ? a.closed_s_error : max_derivative_error(impl->f, impl->s, lo, hi);
    for (double x : probe_points(lo, hi)) {
        a.symmetry_error = std::max({a.symmetry_error, std::fabs(impl->f(-x) - impl->f(x)),
                                     std::fabs(impl->s(-x) + impl->s(x))});
    }

    PulseShape shape;
    shape.impl_ = std::move(impl);
    return shape;
}

double PulseShape::f(double x) const { return impl_->f(x); }
double PulseShape::s(double x) const { return impl_->s(x); }
const Domain& PulseShape::domain() const { return impl_->domain; }
const std::string& PulseShape::name() const { return impl_->name; }
const std::string& PulseShape::formula() const { return impl_->formula; }
int PulseShape::row() const { return impl_->row; }
double PulseShape::area() const { return impl_->area; }
bool PulseShape::closed_s() const { return impl_->audit.closed_s_used; }
const ShapeAudit& PulseShape::audit() const { return impl_->audit; }

double PulseShape::tail_point(double eps) const {
    if (!(eps > 0.0)) throw ContractError("tail area bound must be positive");
    if (!domain().infinite) return domain().half_width;
    const double half = 0.5 * area();
    auto tail = [&](double x) { return half - s(x); };
    double lo = 0.0, hi = 1.0;
    while (tail(hi) > eps) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw DomainError("tail of '" + name() + "' never drops below the bound");
    }
    for (int it = 0; it < 400 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) > eps ? lo : hi) = mid;
    }
    return hi;
}

PulseShape PulseShape::renormalized() const {
    const double k = kPi / area();
    auto base = impl_;
    auto impl = std::make_shared<Impl>(*base);
    impl->f = [base, k](double x) { return k * base->f(x); };
    impl->s = [base, k](double x) { return k * base->s(x); };
    impl->area = kPi;
    impl->formula = base->formula + " (renormalized)";
    impl->audit.area = kPi;
    impl->audit.area_error = 0.0;
    PulseShape shape;
    shape.impl_ = std::move(impl);
    return shape;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

struct PrintedPair {
    RealFn g;
    RealFn phase;
};

struct CatalogRow {
    const char* name;
    const char* formula;
    bool infinite;
    RealFn f;
    RealFn s;
    std::optional<PrintedPair> lmsz;
    std::optional<PrintedPair> aeh;
};

std::vector<CatalogRow> catalog_rows() {
    using std::cos, std::sin, std::tan, std::log, std::atan, std::sinh, std::tanh, std::cosh,
        std::exp, std::erf, std::pow;
    const double pi = kPi, pi2 = pi * pi, pi4 = pi2 * pi2, pi8 = pi4 * pi4;
    std::vector<CatalogRow> rows;

    rows.push_back({"constant", "1", false, [](double) { return 1.0; }, [](double x) { return x; },
                    PrintedPair{[](double x) { return x; }, [](double x) { return 0.5 * x * x; }},
                    PrintedPair{[](double x) { return tan(x); }, [](double x) { return -log(cos(x)); }}});
    rows.push_back({"quadratic", "12/pi^2 x^2", false, [=](double x) { return 12 / pi2 * x * x; },
                    [=](double x) { return 4 / pi2 * x * x * x; },
                    PrintedPair{[=](double x) { return 48 / pi4 * pow(x, 5); },
                                [=](double x) { return 8 / pi4 * pow(x, 6); }},
                    PrintedPair{[=](double x) { return 12 / pi2 * x * x * tan(4 / pi2 * x * x * x); },
                                [=](double x) { return -log(cos(4 / pi2 * x * x * x)); }}});
    rows.push_back({"quartic", "80/pi^4 x^4", false, [=](double x) { return 80 / pi4 * pow(x, 4); },
                    [=](double x) { return 16 / pi4 * pow(x, 5); },
                    PrintedPair{[=](double x) { return 1440 / pi8 * pow(x, 9); },
                                [=](double x) { return 144 / pi8 * pow(x, 10); }},
                    PrintedPair{[=](double x) { return 80 / pi4 * pow(x, 4) * tan(16 / pi4 * pow(x, 5)); },
                                [=](double x) { return -log(cos(16 / pi4 * pow(x, 5))); }}});
    rows.push_back({"cosine", "pi/2 cos x", false, [=](double x) { return pi / 2 * cos(x); },
                    [=](double x) { return pi / 2 * sin(x); },
                    PrintedPair{[=](double x) { return pi2 / 8 * sin(2 * x); },
                                [=](double x) { return pi2 / 8 * sin(x) * sin(x); }},
                    std::nullopt});
    rows.push_back({"cosine^2", "2 cos^2 x", false, [](double x) { return 2 * cos(x) * cos(x); },
                    [](double x) { return x + 0.5 * sin(2 * x); }, std::nullopt, std::nullopt});
    rows.push_back({"cosine^3", "3pi/4 cos^3 x", false, [=](double x) { return 3 * pi / 4 * pow(cos(x), 3); },
                    [=](double x) { return pi / 16 * (9 * sin(x) + sin(3 * x)); }, std::nullopt,
                    std::nullopt});
    rows.push_back({"cosine^4", "8/3 cos^4 x", false, [](double x) { return 8.0 / 3 * pow(cos(x), 4); },
                    [](double x) { return x + 2.0 / 3 * sin(2 * x) + sin(4 * x) / 12; }, std::nullopt,
                    std::nullopt});
    rows.push_back({"sech", "sech x", true, [](double x) { return sech(x); },
                    [](double x) { return atan(sinh(x)); }, std::nullopt,
                    PrintedPair{[](double x) { return tanh(x); },
                                [](double x) {
                                    // ln cosh x without overflow
                                    const double ax = std::fabs(x);
                                    return ax + std::log1p(exp(-2 * ax)) - std::log(2.0);
                                }}});
    rows.push_back({"sech^2", "pi/2 sech^2 x", true, [=](double x) { return pi / 2 * sech(x) * sech(x); },
                    [=](double x) { return pi / 2 * tanh(x); }, std::nullopt, std::nullopt});
    rows.push_back({"sech^3", "2 sech^3 x", true, [](double x) { return 2 * pow(sech(x), 3); },
                    [](double x) { return atan(sinh(x)) + sech(x) * tanh(x); }, std::nullopt, std::nullopt});
    rows.push_back({"sech^4", "3pi/4 sech^4 x", true, [=](double x) { return 3 * pi / 4 * pow(sech(x), 4); },
                    [=](double x) { return pi / 4 * (2 + cosh(x)) * sech(x) * sech(x) * tanh(x); },
                    std::nullopt, std::nullopt});
    rows.push_back({"lorentzian", "1/(1+x^2)", true, [](double x) { return 1 / (1 + x * x); },
                    [](double x) { return atan(x); }, std::nullopt,
                    PrintedPair{[](double x) { return x / (1 + x * x); },
                                [](double x) { return 0.5 * std::log1p(x * x); }}});
    rows.push_back({"lorentzian^2", "2/(1+x^2)^2", true, [](double x) { return 2 / pow(1 + x * x, 2); },
                    [](double x) { return atan(x) + x / (1 + x * x); }, std::nullopt, std::nullopt});
    rows.push_back({"lorentzian^3", "8/(3(1+x^2)^3)", true,
                    [](double x) { return 8 / (3 * pow(1 + x * x, 3)); },
                    [](double x) { return 3 * atan(x) + x * (5 + 3 * x * x) / pow(1 + x * x, 2); },
                    std::nullopt, std::nullopt});
    rows.push_back({"lorentzian^4", "16/(5(1+x^2)^4)", true,
                    [](double x) { return 16 / (5 * pow(1 + x * x, 4)); },
                    [](double x) {
                        const double x2 = x * x;
                        return 15 * atan(x) + x * (33 + 40 * x2 + 15 * x2 * x2) / pow(1 + x2, 3);
                    },
                    std::nullopt, std::nullopt});
    rows.push_back({"gaussian", "sqrt(pi) exp(-x^2)", true,
                    [=](double x) { return std::sqrt(pi) * exp(-x * x); },
                    [=](double x) { return pi / 2 * erf(x); }, std::nullopt, std::nullopt});
    return rows;
}

const std::vector<CatalogRow>& rows() {
    static const std::vector<CatalogRow> table = catalog_rows();
    return table;
}

const std::vector<PulseShape>& shapes() {
    static const std::vector<PulseShape> built = [] {
        std::vector<PulseShape> out;
        int row = 1;
        for (const auto& r : rows()) {
            const Domain d = r.infinite ? Domain::unbounded() : Domain::finite(kHalfPi);
            out.push_back(PulseShape::make(r.name, r.formula, d, r.f, r.s, row++));
        }
        return out;
    }();
    return built;
}

const CatalogRow& row_entry(int row) {
    if (row < 1 || row > static_cast<int>(rows().size()))
        throw LookupError("catalog row " + std::to_string(row) + " does not exist (rows are 1-16)");
    return rows()[static_cast<std::size_t>(row - 1)];
}

double theta_hat(ModelClass c, double s) { return c == ModelClass::lmsz ? s : std::tan(s); }
double phase_hat(ModelClass c, double s) {
    return c == ModelClass::lmsz ? 0.5 * s * s : -std::log(std::cos(s));
}

// Within this distance of a finite edge, pi/2 - |s| is integrated directly:
// envelopes vanishing like cos^n leave pi/2 - s ~ (edge - x)^(n+1), far below
// the rounding error of s itself.
constexpr double kEdgeZone = 0.25;

// pi/2 - |s(x)| for AEH members on finite domains, or nullopt away from the edges.
std::optional<double> edge_complement(const PulseShape& shape, double x) {
    const Domain& d = shape.domain();
    const double ax = std::fabs(x);
    if (d.infinite || d.half_width - ax >= kEdgeZone) return std::nullopt;
    return boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double u) { return shape.f(u); }, ax, d.half_width);
}

RealFn composed_g(ModelClass c, const PulseShape& shape) {
    if (c == ModelClass::aeh && !shape.domain().infinite) {
        return [shape](double x) {
            if (auto comp = edge_complement(shape, x)) return std::copysign(shape.f(x) / std::tan(*comp), x);
            return shape.f(x) * std::tan(shape.s(x));
        };
    }
    return [c, shape](double x) { return shape.f(x) * theta_hat(c, shape.s(x)); };
}

RealFn composed_phase(ModelClass c, const PulseShape& shape) {
    if (c == ModelClass::aeh && !shape.domain().infinite) {
        return [shape](double x) {
            if (auto comp = edge_complement(shape, x)) return -std::log(std::sin(*comp));
            return -std::log(std::cos(shape.s(x)));
        };
    }
    return [c, shape](double x) { return phase_hat(c, shape.s(x)); };
}

double relative_gap(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

PairAudit audit_pair(ModelClass cls, int row, const PrintedPair& printed) {
    const PulseShape& shape = shapes()[static_cast<std::size_t>(row - 1)];
    const RealFn g = composed_g(cls, shape);
    const RealFn ph = composed_phase(cls, shape);
    auto [lo, hi] = probe_range(shape.domain());
    if (cls == ModelClass::aeh && !shape.domain().infinite) {
        lo += kDefaultGuard;
        hi -= kDefaultGuard;
    }
    PairAudit a;
    a.cls = cls;
    a.row = row;
    for (double x : probe_points(lo, hi)) {
        a.g_error = std::max(a.g_error, relative_gap(printed.g(x), g(x)));
        a.phase_error = std::max(a.phase_error, relative_gap(printed.phase(x), ph(x)));
    }
    a.printed_used = a.g_error <= 1e-10 && a.phase_error <= 1e-10;
    return a;
}

const std::vector<PairAudit>& pair_audits() {
    static const std::vector<PairAudit> audits = [] {
        std::vector<PairAudit> out;
        for (int row = 1; row <= static_cast<int>(rows().size()); ++row) {
            const auto& r = row_entry(row);
            if (r.lmsz) out.push_back(audit_pair(ModelClass::lmsz, row, *r.lmsz));
            if (r.aeh) out.push_back(audit_pair(ModelClass::aeh, row, *r.aeh));
        }
        return out;
    }();
    return audits;
}

Truncation resolve(const ModelPair& m, const TruncationPolicy& p) {
    const Domain& d = m.shape.domain();
    const double inf = std::numeric_limits<double>::infinity();
    Truncation t;
    t.policy = p;
    double half = d.infinite ? inf : d.half_width;
    switch (p.kind) {
    case TruncationPolicy::Kind::none:
        break;
    case TruncationPolicy::Kind::tail_area:
        if (d.infinite) half = m.shape.tail_point(p.value);
        break;
    case TruncationPolicy::Kind::window:
        if (!(p.value > 0.0)) throw ContractError("window width must be positive");
        half = std::min(half, 0.5 * p.value);
        break;
    case TruncationPolicy::Kind::endpoint_guard:
        if (d.infinite) return m.truncation;
        if (!(p.value > 0.0) || p.value >= d.half_width)
            throw ContractError("endpoint guard must lie in (0, half width)");
        half = d.half_width - p.value;
        break;
    }
    t.x_lo = -half;
    t.x_hi = half;
    t.area_deficit = std::isfinite(half) ? m.shape.area() - 2.0 * m.shape.s(half) : 0.0;
    return t;
}

}  // namespace

PulseShape catalog_shape(int row) {
    row_entry(row);
    return shapes()[static_cast<std::size_t>(row - 1)];
}

std::vector<ShapeAudit> audit_catalog() {
    std::vector<ShapeAudit> out;
    for (const auto& s : shapes()) out.push_back(s.audit());
    return out;
}

std::vector<PairAudit> audit_printed_pairs() { return pair_audits(); }

std::string describe(const TruncationPolicy& p) {
    std::ostringstream os;
    os.precision(10);
    switch (p.kind) {
    case TruncationPolicy::Kind::none: os << "none"; break;
    case TruncationPolicy::Kind::tail_area: os << "tail-area eps=" << p.value; break;
    case TruncationPolicy::Kind::window: os << "window T/tau=" << p.value; break;
    case TruncationPolicy::Kind::endpoint_guard: os << "endpoint-guard delta=" << p.value; break;
    }
    return os.str();
}

double StueckelbergClass::theta(double sigma) const {
    if (!(omega0 > 0.0)) throw ContractError("Stueckelberg variable needs omega0 > 0");
    if (tag == ModelClass::lmsz) return delta0 / (omega0 * omega0 * tau) * sigma;
    return delta0 / omega0 * std::tan(sigma / (omega0 * tau));
}

double StueckelbergClass::phase(double sigma) const {
    if (!(omega0 > 0.0)) throw ContractError("Stueckelberg variable needs omega0 > 0");
    if (tag == ModelClass::lmsz) return delta0 / (2 * omega0 * omega0 * tau) * sigma * sigma;
    return -delta0 * tau * std::log(std::cos(sigma / (omega0 * tau)));
}

DriveSample ModelPair::sample(double x) const {
    return {omega0 * shape.f(x), delta0 * g(x), delta0 * tau * phase_shape(x)};
}

StueckelbergClass ModelPair::generator() const { return {cls, omega0, delta0, tau}; }

ModelPair ModelPair::with_amplitudes(double new_omega0, double new_delta0) const {
    ModelPair m = *this;
    m.omega0 = new_omega0;
    m.delta0 = new_delta0;
    return m;
}

ModelPair ModelPair::with_class_parameters(double alpha, double beta) const {
    ModelPair m = *this;
    m.tau = 1.0;
    m.omega0 = 2.0 * alpha;
    m.delta0 = 2.0 * beta;
    return m;
}

TruncationPolicy default_truncation(const ModelPair& m) {
    if (m.shape.domain().infinite) return TruncationPolicy::tail_area(kDefaultTailEps);
    if (m.pole_at_edges) return TruncationPolicy::endpoint_guard(kDefaultGuard);
    return TruncationPolicy::full();
}

ModelPair truncate(const ModelPair& model, const TruncationPolicy& policy) {
    ModelPair m = model;
    m.truncation = resolve(model, policy);
    return m;
}

ModelPair pair_from_shape(ModelClass cls, const PulseShape& shape, double omega0, double delta0,
                          double tau) {
    if (!(tau > 0.0)) throw ContractError("tau must be positive");
    if (std::fabs(shape.area() - kPi) > 1e-4) {
        std::ostringstream os;
        os.precision(12);
        os << "shape '" << shape.name() << "' has area " << shape.area()
           << ", not pi; renormalize it first";
        throw ContractError(os.str());
    }
    ModelPair m;
    m.shape = shape;
    m.cls = cls;
    m.omega0 = omega0;
    m.delta0 = delta0;
    m.tau = tau;
    m.g = composed_g(cls, shape);
    m.phase_shape = composed_phase(cls, shape);
    m.pole_at_edges = cls == ModelClass::aeh && !shape.domain().infinite;
    m.truncation = resolve(m, default_truncation(m));
    return m;
}

ModelPair catalog_model(ModelClass cls, int row, double omega0, double delta0, double tau) {
    const CatalogRow& r = row_entry(row);
    ModelPair m = pair_from_shape(cls, shapes()[static_cast<std::size_t>(row - 1)], omega0, delta0, tau);
    const auto& printed = cls == ModelClass::lmsz ? r.lmsz : r.aeh;
    if (printed) {
        for (const auto& a : pair_audits()) {
            if (a.cls == cls && a.row == row && a.printed_used) {
                m.g = printed->g;
                m.phase_shape = printed->phase;
                m.g_from_table = true;
            }
        }
    }
    return m;
}

std::optional<double> experimental_window(ModelClass cls, int row) {
    if (cls == ModelClass::lmsz) {
        if (row == 1 || row == 4) return 88.9 / 28.3;
        if (row == 8) return 88.9 / 22.2;
    } else {
        if (row == 1 || row == 4) return 177.8 / 56.6;
        if (row == 8) return 177.8 / 17.8;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Detuning-first construction

ModelPair pair_from_detuning(ModelClass cls, const DetuningShape& det, double omega0, double delta0,
                             double tau, const SigmaSeed& seed) {
    if (!(tau > 0.0)) throw ContractError("tau must be positive");
    if (!det.g) throw ContractError("detuning shape has no function");
    const RealFn& g = det.g;
    if (std::fabs(g(0.0)) > 1e-12) throw ContractError("detuning shape must vanish at x = 0");
    {
        const auto [lo, hi] = probe_range(det.domain);
        for (double x : probe_points(0.0, hi)) {
            if (x >= hi) continue;
            if (relative_gap(g(-x), -g(x)) > 1e-9)
                throw ContractError("detuning shape '" + det.name + "' is not antisymmetric");
        }
        (void)lo;
    }

    // Local expansion s = a x + b x^3 from g = g1 x + g3 x^3 and theta(s) = s + c3 s^3.
    const double hd = 1e-2;
    auto q = [&](double x) { return g(x) / x; };
    const double g1 = seed.slope ? *seed.slope : (4.0 * q(hd) - q(2 * hd)) / 3.0;
    const double g3 = (q(2 * hd) - q(hd)) / (3.0 * hd * hd);
    if (!(g1 > 1e-12))
        throw SingularityError("detuning slope g'(0) = " + std::to_string(g1) +
                               " leaves the series start of s(x) undetermined");
    const double c3 = cls == ModelClass::aeh ? 1.0 / 3.0 : 0.0;
    const double a = std::sqrt(g1);
    const double b = (g3 - c3 * a * a * a * a) / (4.0 * a);
    const double x0 = seed.x0;

    double x_stop = seed.x_max;
    TruncationPolicy stop_policy = TruncationPolicy::tail_area(seed.tail_eps);
    if (!det.domain.infinite) {
        x_stop = det.domain.half_width;
        stop_policy = TruncationPolicy::full();
        if (cls == ModelClass::aeh) {
            x_stop -= seed.guard;
            stop_policy = TruncationPolicy::endpoint_guard(seed.guard);
        }
    }
    if (!(x_stop > x0)) throw ContractError("detuning domain is shorter than the series start");

    std::vector<double> xs{0.0, x0}, ss{0.0, a * x0 + b * x0 * x0 * x0}, fs{a, 0.0};
    fs[1] = g(x0) / theta_hat(cls, ss[1]);

    auto rhs = [&](double x, const ode::State<1>& y, ode::State<1>& dy) {
        dy[0] = g(x) / theta_hat(cls, y[0]);
    };
    ode::AdaptiveOptions opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-15;

    ode::State<1> y{ss[1]};
    double x = x0;
    bool completed = false;
    while (x < x_stop) {
        const double xn = std::min(x_stop, (std::floor(x / seed.node_spacing) + 1.0) * seed.node_spacing);
        ode::State<1> prev = y;
        try {
            ode::dop853<1>(rhs, x, xn, y, opt);
        } catch (const ConvergenceError& e) {
            if (cls == ModelClass::lmsz) {
                // s' blows up only when s has run past pi/2 on the far side of a sign change.
                throw DomainError(std::string("sigma left the class domain: ") + e.what());
            }
            throw;
        }
        if (!std::isfinite(y[0]) || y[0] <= 0.0)
            throw DomainError("sigma left the class domain near x = " + std::to_string(xn));
        if (cls == ModelClass::lmsz && y[0] >= kHalfPi) {
            // Locate s = pi/2 inside the last cell: the finite pulse ends there.
            double lo = x, hi = xn;
            ode::State<1> ylo = prev;
            for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                ode::State<1> ym = ylo;
                ode::dop853<1>(rhs, lo, mid, ym, opt);
                if (ym[0] >= kHalfPi) {
                    hi = mid;
                } else {
                    lo = mid;
                    ylo = ym;
                }
            }
            xs.push_back(hi);
            ss.push_back(kHalfPi);
            fs.push_back(g(hi) / kHalfPi);
            completed = true;
            break;
        }
        if (cls == ModelClass::aeh && y[0] >= kHalfPi)
            throw DomainError("sigma reached the pole of tan at x = " + std::to_string(xn));
        xs.push_back(xn);
        ss.push_back(y[0]);
        fs.push_back(g(xn) / theta_hat(cls, y[0]));
        x = xn;
        if (kHalfPi - y[0] < seed.tail_eps) {
            completed = true;
            break;
        }
    }
    if (cls == ModelClass::lmsz && !completed) {
        if (det.domain.infinite || kHalfPi - ss.back() > 1e-6)
            throw DomainError("detuning '" + det.name + "' cannot complete the LMSZ sigma range up to x = " +
                              std::to_string(x_stop));
    }
    if (cls == ModelClass::aeh && !completed && det.domain.infinite)
        throw DomainError("detuning '" + det.name + "' leaves a tail area above the bound at x = " +
                          std::to_string(x_stop));

    const double x_end = xs.back();
    auto table = std::make_shared<HermiteTable>(xs, ss, fs);
    RealFn s_fn = [table, a, b, x0, x_end](double xq) {
        const double ax = std::fabs(xq);
        double v;
        if (ax < x0) v = a * ax + b * ax * ax * ax;
        else if (ax >= x_end) v = (*table)(x_end);
        else v = (*table)(ax);
        return xq < 0 ? -v : v;
    };
    RealFn f_fn = [g, cls, s_fn, a, b, x0, x_end](double xq) {
        const double ax = std::fabs(xq);
        if (ax > x_end) return 0.0;
        if (ax < x0) return a + 3.0 * b * ax * ax;
        return g(ax) / theta_hat(cls, s_fn(ax));
    };

    PulseShape shape = PulseShape::make("from detuning " + det.name, "Omega from g by sigma ODE",
                                        Domain::finite(x_end), f_fn, s_fn, 0);
    ModelPair m;
    m.shape = shape;
    m.cls = cls;
    m.omega0 = omega0;
    m.delta0 = delta0;
    m.tau = tau;
    m.g = g;
    m.phase_shape = [cls, s_fn](double xq) { return phase_hat(cls, s_fn(xq)); };
    m.pole_at_edges = false;
    m.truncation.policy = stop_policy;
    m.truncation.x_lo = -x_end;
    m.truncation.x_hi = x_end;
    m.truncation.area_deficit = kPi - 2.0 * ss.back();
    return m;
}

}  // namespace isoprob
