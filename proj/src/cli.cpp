#include "isoprob/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "isoprob/alignment.hpp"
#include "isoprob/analytic.hpp"
#include "isoprob/catalog.hpp"
#include "isoprob/dynamics.hpp"
#include "isoprob/errors.hpp"
#include "isoprob/landscape.hpp"

namespace isoprob::cli {

namespace {

using nlohmann::json;

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Integrator and truncation flags shared by simulate and scan.
struct NumericsFlags {
    IntegratorConfig cfg;
    long fixed_steps = 0;
    double tail_eps = 0.0, window = 0.0, guard = 0.0;
    CLI::Option *tail_opt = nullptr, *window_opt = nullptr, *guard_opt = nullptr, *full_opt = nullptr;
    bool full = false;

    void add(CLI::App* app) {
        app->add_option("--rel-tol", cfg.rel_tol, "Relative step tolerance")->capture_default_str();
        app->add_option("--abs-tol", cfg.abs_tol, "Absolute step tolerance")->capture_default_str();
        app->add_option("--max-steps", cfg.max_steps, "Step budget")->capture_default_str();
        app->add_option("--fixed-steps", fixed_steps, "Use fixed-step RK4 with this many steps");
        tail_opt = app->add_option("--tail-eps", tail_eps, "Truncate where the tail area per side is below this");
        window_opt = app->add_option("--window", window, "Truncate to a window of width T/tau");
        guard_opt = app->add_option("--guard", guard, "Stop this far short of pole-bearing endpoints");
        full_opt = app->add_flag("--full", full, "No truncation (finite domains only)");
        tail_opt->excludes(window_opt)->excludes(guard_opt)->excludes(full_opt);
        window_opt->excludes(guard_opt)->excludes(full_opt);
        guard_opt->excludes(full_opt);
    }

    IntegratorConfig config() const {
        IntegratorConfig c = cfg;
        if (fixed_steps > 0) {
            c.mode = IntegratorConfig::Mode::fixed_step;
            c.fixed_steps = fixed_steps;
        }
        c.validate();
        return c;
    }

    std::optional<TruncationPolicy> policy() const {
        if (tail_opt->count()) return TruncationPolicy::tail_area(tail_eps);
        if (window_opt->count()) return TruncationPolicy::window(window);
        if (guard_opt->count()) return TruncationPolicy::endpoint_guard(guard);
        if (full) return TruncationPolicy::full();
        return std::nullopt;
    }
};

// Either (alpha, beta) or physical (Omega0/2pi, Delta0/2pi in MHz, tau in ns).
struct ParameterFlags {
    double alpha = 0.0, beta = 0.0, omega_mhz = 0.0, delta_mhz = 0.0, tau_ns = 0.0;
    CLI::Option *a = nullptr, *b = nullptr, *om = nullptr, *dm = nullptr, *tn = nullptr;

    void add(CLI::App* app) {
        a = app->add_option("--alpha", alpha, "Class parameter Omega0 tau / 2");
        b = app->add_option("--beta", beta, "Class parameter Delta0 tau / 2");
        om = app->add_option("--omega0-mhz", omega_mhz, "Omega0 / 2pi in MHz");
        dm = app->add_option("--delta0-mhz", delta_mhz, "Delta0 / 2pi in MHz");
        tn = app->add_option("--tau-ns", tau_ns, "tau in ns");
        for (auto* d : {a, b})
            for (auto* p : {om, dm, tn}) d->excludes(p);
    }

    std::pair<double, double> resolve() const {
        const bool dimensionless = a->count() || b->count();
        const bool physical = om->count() || dm->count() || tn->count();
        if (dimensionless) {
            if (!a->count() || !b->count()) throw ContractError("--alpha and --beta must be given together");
            return {alpha, beta};
        }
        if (physical) {
            if (!om->count() || !dm->count() || !tn->count())
                throw ContractError("--omega0-mhz, --delta0-mhz and --tau-ns must be given together");
            if (!(tau_ns > 0.0)) throw ContractError("--tau-ns must be positive");
            return {class_parameter_from_mhz(omega_mhz, tau_ns), class_parameter_from_mhz(delta_mhz, tau_ns)};
        }
        throw ContractError("give either --alpha/--beta or --omega0-mhz/--delta0-mhz/--tau-ns");
    }
};

json params_json(const AlignParams& p) {
    return json{{"dx", p.dx}, {"dy", p.dy}, {"trims", p.trims}};
}

void write_grid_csv(std::ostream& os, const Grid& g) {
    char buf[64];
    for (std::size_t i = 0; i < g.rows; ++i) {
        for (std::size_t j = 0; j < g.cols; ++j) {
            std::snprintf(buf, sizeof buf, "%.9g", g(i, j));
            if (j) os << ',';
            os << buf;
        }
        os << '\n';
    }
}

AxisSpec physical_axis(const std::string& text, double tau_ns) {
    AxisSpec mhz = AxisSpec::parse(text);
    return {class_parameter_from_mhz(mhz.start, tau_ns), class_parameter_from_mhz(mhz.stop, tau_ns), mhz.count};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Isoprobability classes of two-level models", "isoprob"};
    app.require_subcommand(1);

    // catalog
    auto* catalog = app.add_subcommand("catalog", "Pulse-shape catalog");
    catalog->require_subcommand(1);
    auto* cat_list = catalog->add_subcommand("list", "List the catalog rows");
    bool list_csv = false;
    cat_list->add_flag("--csv", list_csv, "CSV on stdout: row,name,domain_kind,has_closed_s");
    auto* cat_audit = catalog->add_subcommand("audit", "Area, derivative and printed-pair audits as JSON lines");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Transition probability of one class member");
    std::string cls_name, picture_name = "detuning", trajectory_path;
    int row = 0;
    simulate->add_option("--class", cls_name, "lmsz or aeh")->required();
    simulate->add_option("--row", row, "Catalog row 1-16")->required();
    simulate->add_option("--picture", picture_name, "detuning or phase")->capture_default_str();
    simulate->add_option("--trajectory", trajectory_path, "Write the ground-state trajectory CSV here");
    ParameterFlags sim_params;
    sim_params.add(simulate);
    NumericsFlags sim_num;
    sim_num.add(simulate);

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "Excitation landscape over (alpha, beta)");
    std::string scan_cls, scan_picture = "detuning", alpha_text = "0:3:101", beta_text = "-2:2:101";
    std::string omega_axis_text, delta_axis_text, out_path, pgm_path;
    double scan_tau_ns = 0.0;
    int scan_row = 0;
    unsigned threads = 0;
    scan_cmd->add_option("--class", scan_cls, "lmsz or aeh")->required();
    scan_cmd->add_option("--row", scan_row, "Catalog row 1-16")->required();
    scan_cmd->add_option("--picture", scan_picture, "detuning or phase")->capture_default_str();
    auto* alpha_opt = scan_cmd->add_option("--alpha", alpha_text, "alpha axis start:stop:count")->capture_default_str();
    auto* beta_opt = scan_cmd->add_option("--beta", beta_text, "beta axis start:stop:count")->capture_default_str();
    auto* omega_axis_opt = scan_cmd->add_option("--omega0-mhz", omega_axis_text, "Omega0/2pi axis in MHz");
    auto* delta_axis_opt = scan_cmd->add_option("--delta0-mhz", delta_axis_text, "Delta0/2pi axis in MHz");
    auto* scan_tau_opt = scan_cmd->add_option("--tau-ns", scan_tau_ns, "tau in ns for physical axes");
    for (auto* d : {alpha_opt, beta_opt})
        for (auto* p : {omega_axis_opt, delta_axis_opt, scan_tau_opt}) d->excludes(p);
    scan_cmd->add_option("--out", out_path, "CSV output path (stdout if absent)");
    scan_cmd->add_option("--pgm", pgm_path, "Also write a PGM raster");
    scan_cmd->add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
    NumericsFlags scan_num;
    scan_num.add(scan_cmd);

    // analytic
    auto* analytic_cmd = app.add_subcommand("analytic", "Closed-form probability");
    std::string model_name;
    double an_alpha = 0.0, an_beta = 0.0;
    analytic_cmd->add_option("--model", model_name, "aeh, lmsz or rabi")
        ->required()
        ->check(CLI::IsMember({"aeh", "lmsz", "rabi"}));
    analytic_cmd->add_option("--alpha", an_alpha, "Omega0 tau / 2")->required();
    analytic_cmd->add_option("--beta", an_beta, "Delta0 tau / 2")->capture_default_str();

    // compare
    auto* compare = app.add_subcommand("compare", "MSE between two landscape CSV files");
    std::string path_a, path_b, diff_path;
    bool do_align = false;
    std::size_t resample_n = 0;
    double bounds_pct = 5.0;
    int max_shift = -1, max_trim = -1;
    compare->add_option("a", path_a, "First landscape")->required();
    compare->add_option("b", path_b, "Second landscape")->required();
    compare->add_flag("--align", do_align, "Optimize shifts and trims of b");
    compare->add_option("--resample", resample_n, "Resample both maps to N x N first");
    compare->add_option("--bounds-pct", bounds_pct, "Shift and trim bounds, percent of each dimension")
        ->capture_default_str();
    compare->add_option("--max-shift", max_shift, "Override the shift bound in pixels");
    compare->add_option("--max-trim", max_trim, "Override the trim bound in pixels");
    compare->add_option("--diff", diff_path, "Write the difference map a - b over the overlap");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (cat_list->parsed()) {
            if (list_csv) out << "row,name,domain_kind,has_closed_s\n";
            else err << std::left << std::setw(4) << "row" << std::setw(16) << "name" << std::setw(22) << "f(x)"
                     << std::setw(18) << "domain" << "classes\n";
            for (int r = 1; r <= 16; ++r) {
                const PulseShape s = catalog_shape(r);
                const bool inf = s.domain().infinite;
                if (list_csv) {
                    out << r << ',' << s.name() << ',' << (inf ? "infinite" : "finite") << ','
                        << (s.closed_s() ? "true" : "false") << '\n';
                } else {
                    err << std::left << std::setw(4) << r << std::setw(16) << s.name() << std::setw(22) << s.formula()
                        << std::setw(18) << (inf ? "(-inf, inf)" : "[-pi/2, pi/2]") << "lmsz,aeh\n";
                }
            }
            return 0;
        }
        if (cat_audit->parsed()) {
            bool all_ok = true;
            for (const auto& a : audit_catalog()) {
                const bool ok = a.area_error <= 1e-6 && a.s_error <= 1e-6;
                all_ok = all_ok && ok;
                out << json{{"kind", "shape"},           {"row", a.row},
                            {"name", a.name},            {"area", a.area},
                            {"area_error", a.area_error}, {"closed_s_offered", a.closed_s_offered},
                            {"closed_s_error", a.closed_s_error}, {"closed_s_used", a.closed_s_used},
                            {"s_error", a.s_error},      {"symmetry_error", a.symmetry_error},
                            {"pass", ok}}
                           .dump()
                    << '\n';
            }
            for (const auto& p : audit_printed_pairs()) {
                out << json{{"kind", "printed_pair"}, {"class", std::string(to_string(p.cls))},
                            {"row", p.row},           {"g_error", p.g_error},
                            {"phase_error", p.phase_error}, {"printed_used", p.printed_used}}
                           .dump()
                    << '\n';
            }
            return all_ok ? 0 : 1;
        }
        if (simulate->parsed()) {
            const ModelClass cls = parse_model_class(cls_name);
            const Picture picture = parse_picture(picture_name);
            const auto [alpha, beta] = sim_params.resolve();
            if (alpha < 0.0) throw ContractError("alpha must be non-negative");
            const IntegratorConfig cfg = sim_num.config();
            ModelPair model = catalog_model(cls, row, 0.0, 0.0, 1.0);
            if (auto pol = sim_num.policy()) model = truncate(model, *pol);
            model = model.with_class_parameters(alpha, beta);

            Trajectory trajectory;
            const Propagator u = propagate(model, picture, default_span(model), cfg,
                                           trajectory_path.empty() ? nullptr : &trajectory);
            const QubitState final_state = u.apply(QubitState{});
            const double p = std::clamp(u.transition_probability(), 0.0, 1.0);
            json j{{"class", std::string(to_string(cls))},
                   {"row", row},
                   {"picture", std::string(to_string(picture))},
                   {"alpha", alpha},
                   {"beta", beta},
                   {"p", p},
                   {"norm_error", std::fabs(final_state.norm() - 1.0)},
                   {"unitarity_error", u.unitarity_error()},
                   {"x_lo", model.truncation.x_lo},
                   {"x_hi", model.truncation.x_hi},
                   {"truncation", describe(model.truncation.policy)},
                   {"area_deficit", model.truncation.area_deficit}};
            if (model.truncation.policy.kind == TruncationPolicy::Kind::endpoint_guard &&
                !model.shape.domain().infinite)
                j["guard_error_estimate"] = guard_error_estimate(model, picture, cfg);
            out << j.dump() << '\n';
            if (!trajectory_path.empty()) {
                std::ofstream os(trajectory_path);
                if (!os) throw std::runtime_error("cannot open '" + trajectory_path + "' for writing");
                write_trajectory_csv(os, trajectory);
            }
            return 0;
        }
        if (scan_cmd->parsed()) {
            const ModelClass cls = parse_model_class(scan_cls);
            const Picture picture = parse_picture(scan_picture);
            AxisSpec alpha_axis, beta_axis;
            if (omega_axis_opt->count() || delta_axis_opt->count() || scan_tau_opt->count()) {
                if (!omega_axis_opt->count() || !delta_axis_opt->count() || !scan_tau_opt->count())
                    throw ContractError("--omega0-mhz, --delta0-mhz and --tau-ns must be given together");
                if (!(scan_tau_ns > 0.0)) throw ContractError("--tau-ns must be positive");
                alpha_axis = physical_axis(omega_axis_text, scan_tau_ns);
                beta_axis = physical_axis(delta_axis_text, scan_tau_ns);
            } else {
                alpha_axis = AxisSpec::parse(alpha_text);
                beta_axis = AxisSpec::parse(beta_text);
            }
            ScanOptions opts;
            opts.threads = threads;
            if (auto pol = scan_num.policy()) {
                opts.use_default_truncation = false;
                opts.truncation = *pol;
            }
            const Landscape l = scan(cls, scan_row, alpha_axis, beta_axis, picture, scan_num.config(), opts);
            if (out_path.empty()) {
                save_csv(l, out);
            } else {
                save_csv(l, std::filesystem::path(out_path));
            }
            if (!pgm_path.empty()) render_pgm(l, std::filesystem::path(pgm_path));
            err << "scanned " << l.grid.rows << " x " << l.grid.cols << " nodes (" << to_string(cls) << " row "
                << scan_row << ", " << to_string(picture) << " picture)\n";
            return 0;
        }
        if (analytic_cmd->parsed()) {
            double p = 0.0;
            if (model_name == "aeh") p = analytic::aeh_exact(an_alpha, an_beta);
            else if (model_name == "lmsz") p = analytic::lmsz_asymptotic(an_alpha, an_beta);
            else p = analytic::rabi_resonant(an_alpha);
            out << fmt12(p) << '\n';
            return 0;
        }
        if (compare->parsed()) {
            Landscape a = load_csv(std::filesystem::path(path_a));
            Landscape b = load_csv(std::filesystem::path(path_b));
            if (a.alpha_axis.start != b.alpha_axis.start || a.alpha_axis.stop != b.alpha_axis.stop ||
                a.beta_axis.start != b.beta_axis.start || a.beta_axis.stop != b.beta_axis.stop)
                err << "warning: the maps cover different axis ranges; comparing by pixel position\n";
            if (resample_n > 0) {
                a = resample_bilinear(a, resample_n, resample_n);
                b = resample_bilinear(b, resample_n, resample_n);
            } else if (a.grid.rows != b.grid.rows || a.grid.cols != b.grid.cols) {
                err << "resampling b to " << a.grid.rows << " x " << a.grid.cols << "\n";
                b = resample_bilinear(b, a.alpha_axis.count, a.beta_axis.count);
            }
            AlignmentResult res;
            if (do_align) {
                AlignBounds bounds = AlignBounds::fraction(a.grid.rows, a.grid.cols, bounds_pct);
                if (max_shift >= 0) bounds.shift_x = bounds.shift_y = max_shift;
                if (max_trim >= 0) bounds.trim_x = bounds.trim_y = max_trim;
                AlignConfig cfg;
                cfg.keep_difference_map = !diff_path.empty();
                res = align(a, b, bounds, cfg);
            } else {
                res.mse_pre = res.mse_post = mse(a, b);
                res.overlap_size = a.grid.values.size();
                if (!diff_path.empty()) {
                    Grid d = a.grid;
                    for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= b.grid.values[k];
                    res.difference_map = std::move(d);
                }
            }
            out << json{{"mse_pre", res.mse_pre},
                        {"mse_post", res.mse_post},
                        {"params", params_json(res.params)},
                        {"overlap_size", res.overlap_size},
                        {"aligned", do_align},
                        {"rows", a.grid.rows},
                        {"cols", a.grid.cols}}
                       .dump()
                << '\n';
            if (res.mse_post > 0.0) err << "improvement factor " << res.mse_pre / res.mse_post << "\n";
            if (!diff_path.empty()) {
                std::ofstream os(diff_path);
                if (!os) throw std::runtime_error("cannot open '" + diff_path + "' for writing");
                write_grid_csv(os, *res.difference_map);
            }
            return 0;
        }
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const LookupError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace isoprob::cli
