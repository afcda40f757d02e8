#include "isoprob/landscape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "isoprob/errors.hpp"

namespace isoprob {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& token, double& out) {
    const std::string t = trim(token);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

bool parse_count(const std::string& token, std::size_t& out) {
    const std::string t = trim(token);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) return false;
    out = static_cast<std::size_t>(std::stoull(t));
    return true;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

AxisSpec parse_axis_line(const std::string& line, const char* name, std::size_t lineno) {
    if (line.rfind("#", 0) != 0) throw ParseError(std::string("expected '# ") + name + ",start,stop,count'", lineno);
    const auto parts = split(line.substr(1), ',');
    if (parts.size() != 4 || trim(parts[0]) != name)
        throw ParseError(std::string("expected '# ") + name + ",start,stop,count'", lineno);
    AxisSpec a;
    if (!parse_double(parts[1], a.start) || !parse_double(parts[2], a.stop) || !parse_count(parts[3], a.count))
        throw ParseError(std::string("malformed ") + name + " axis", lineno);
    try {
        a.validate();
    } catch (const ContractError& e) {
        throw ParseError(e.what(), lineno);
    }
    return a;
}

}  // namespace

double AxisSpec::at(std::size_t i) const {
    if (i + 1 == count) return stop;
    return start + static_cast<double>(i) * step();
}

void AxisSpec::validate() const {
    if (count < 2) throw ContractError("axis needs at least 2 nodes");
    if (!std::isfinite(start) || !std::isfinite(stop) || !(stop > start))
        throw ContractError("axis needs finite start < stop");
}

AxisSpec AxisSpec::parse(const std::string& text) {
    const auto parts = split(text, ':');
    AxisSpec a;
    if (parts.size() != 3 || !parse_double(parts[0], a.start) || !parse_double(parts[1], a.stop) ||
        !parse_count(parts[2], a.count))
        throw ContractError("axis spec '" + text + "' is not start:stop:count");
    a.validate();
    return a;
}

void Landscape::validate() const {
    alpha_axis.validate();
    beta_axis.validate();
    if (grid.rows != beta_axis.count || grid.cols != alpha_axis.count ||
        grid.values.size() != grid.rows * grid.cols)
        throw ContractError("landscape grid does not match its axes");
    for (double v : grid.values)
        if (!(v >= 0.0 && v <= 1.0)) throw ContractError("landscape value outside [0, 1]");
}

Landscape scan_model(const ModelPair& model, const AxisSpec& alpha_axis, const AxisSpec& beta_axis,
                     Picture picture, const IntegratorConfig& cfg, const ScanOptions& options) {
    alpha_axis.validate();
    beta_axis.validate();
    cfg.validate();
    for (std::size_t j = 0; j < alpha_axis.count; ++j)
        if (alpha_axis.at(j) < 0.0) throw ContractError("alpha axis must be non-negative");

    const ModelPair base = options.use_default_truncation ? model : truncate(model, options.truncation);

    Landscape out;
    out.alpha_axis = alpha_axis;
    out.beta_axis = beta_axis;
    out.grid = Grid(beta_axis.count, alpha_axis.count);
    out.meta.model_class = std::string(to_string(model.cls));
    out.meta.row = model.shape.row();
    out.meta.picture = std::string(to_string(picture));
    out.meta.integrator = cfg;
    out.meta.truncation = base.truncation.policy;

    const std::size_t total = out.grid.values.size();
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::size_t failed_at = total;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= total) return;
            const std::size_t i = k / alpha_axis.count, j = k % alpha_axis.count;
            try {
                const ModelPair m = base.with_class_parameters(alpha_axis.at(j), beta_axis.at(i));
                out.grid.values[k] = transition_probability(m, picture, cfg);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (k < failed_at) {
                    failed_at = k;
                    failure = std::current_exception();
                }
            }
        }
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (failure) {
        const std::size_t i = failed_at / alpha_axis.count, j = failed_at % alpha_axis.count;
        std::ostringstream where;
        where.precision(17);
        where << "scan failed at (alpha, beta) = (" << alpha_axis.at(j) << ", " << beta_axis.at(i) << "): ";
        try {
            std::rethrow_exception(failure);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(where.str() + e.what(), e.reached());
        } catch (const DomainError& e) {
            throw DomainError(where.str() + e.what());
        } catch (const std::exception& e) {
            throw std::runtime_error(where.str() + e.what());
        }
    }
    return out;
}

Landscape scan(ModelClass cls, int row, const AxisSpec& alpha_axis, const AxisSpec& beta_axis,
               Picture picture, const IntegratorConfig& cfg, const ScanOptions& options) {
    return scan_model(catalog_model(cls, row, 0.0, 0.0, 1.0), alpha_axis, beta_axis, picture, cfg, options);
}

void save_csv(const Landscape& l, std::ostream& os) {
    l.validate();
    os << "# " << l.meta.model_class << ',' << l.meta.row << ',' << l.meta.picture << '\n';
    os << "# alpha," << fmt("%.17g", l.alpha_axis.start) << ',' << fmt("%.17g", l.alpha_axis.stop) << ','
       << l.alpha_axis.count << '\n';
    os << "# beta," << fmt("%.17g", l.beta_axis.start) << ',' << fmt("%.17g", l.beta_axis.stop) << ','
       << l.beta_axis.count << '\n';
    for (std::size_t i = 0; i < l.grid.rows; ++i) {
        for (std::size_t j = 0; j < l.grid.cols; ++j) {
            if (j) os << ',';
            os << fmt("%.9g", l.grid(i, j));
        }
        os << '\n';
    }
}

void save_csv(const Landscape& l, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    save_csv(l, os);
    if (!os) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Landscape load_csv(std::istream& is) {
    Landscape l;
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(is, line)) return false;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next_line() || line.rfind("#", 0) != 0) throw ParseError("expected '# class,row,picture'", 1);
    {
        const auto parts = split(line.substr(1), ',');
        std::size_t row = 0;
        if (parts.size() != 3 || trim(parts[0]).empty() || trim(parts[2]).empty() || !parse_count(parts[1], row))
            throw ParseError("expected '# class,row,picture'", lineno);
        l.meta.model_class = trim(parts[0]);
        l.meta.row = static_cast<int>(row);
        l.meta.picture = trim(parts[2]);
    }
    if (!next_line()) throw ParseError("missing alpha axis header", lineno + 1);
    l.alpha_axis = parse_axis_line(line, "alpha", lineno);
    if (!next_line()) throw ParseError("missing beta axis header", lineno + 1);
    l.beta_axis = parse_axis_line(line, "beta", lineno);

    l.grid = Grid(l.beta_axis.count, l.alpha_axis.count);
    for (std::size_t i = 0; i < l.beta_axis.count; ++i) {
        if (!next_line()) throw ParseError("expected " + std::to_string(l.beta_axis.count) + " data rows", lineno + 1);
        const auto cells = split(line, ',');
        if (cells.size() != l.alpha_axis.count)
            throw ParseError("row has " + std::to_string(cells.size()) + " values, expected " +
                                 std::to_string(l.alpha_axis.count),
                             lineno);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double v = 0.0;
            if (!parse_double(cells[j], v)) throw ParseError("malformed value '" + cells[j] + "'", lineno);
            if (!(v >= 0.0 && v <= 1.0))
                throw ParseError("probability " + trim(cells[j]) + " outside [0, 1]", lineno);
            l.grid(i, j) = v;
        }
    }
    while (next_line()) {
        if (!trim(line).empty()) throw ParseError("unexpected data after the last row", lineno);
    }
    return l;
}

Landscape load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
    return load_csv(is);
}

void render_pgm(const Landscape& l, std::ostream& os) {
    l.validate();
    os << "P5\n" << l.grid.cols << ' ' << l.grid.rows << "\n255\n";
    std::string row(l.grid.cols, '\0');
    for (std::size_t r = l.grid.rows; r-- > 0;) {
        for (std::size_t c = 0; c < l.grid.cols; ++c)
            row[c] = static_cast<char>(static_cast<unsigned char>(std::lround(l.grid(r, c) * 255.0)));
        os.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

void render_pgm(const Landscape& l, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    render_pgm(l, os);
    if (!os) throw std::runtime_error("write to '" + path.string() + "' failed");
}

double class_parameter_from_mhz(double freq_mhz, double tau_ns) {
    // (2 pi f[MHz] 1e6) (tau[ns] 1e-9) / 2
    return std::numbers::pi * freq_mhz * tau_ns * 1e-3;
}

}  // namespace isoprob
