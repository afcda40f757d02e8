#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "isoprob/catalog.hpp"
#include "isoprob/dynamics.hpp"

namespace isoprob {

/// Uniform axis: `count` nodes from start to stop inclusive.
struct AxisSpec {
    double start = 0.0;
    double stop = 1.0;
    std::size_t count = 2;

    double at(std::size_t i) const;
    double step() const { return (stop - start) / static_cast<double>(count - 1); }
    void validate() const;
    /// "start:stop:count"
    static AxisSpec parse(const std::string& text);
};

/// Row-major rows x cols grid of doubles without range constraints.
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Grid() = default;
    Grid(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct LandscapeMeta {
    std::string model_class = "aeh";
    int row = 0;
    std::string picture = "detuning";
    IntegratorConfig integrator;
    TruncationPolicy truncation;  // kind none means "model default"
};

/// Transition probability P(alpha_j, beta_i): rows follow beta, columns alpha.
struct Landscape {
    Grid grid;
    AxisSpec alpha_axis;
    AxisSpec beta_axis;
    LandscapeMeta meta;

    double at(std::size_t i_beta, std::size_t j_alpha) const { return grid(i_beta, j_alpha); }
    /// Throws ContractError unless every value is in [0, 1] and shapes agree with the axes.
    void validate() const;
};

struct ScanOptions {
    unsigned threads = 0;  // 0: hardware concurrency
    bool use_default_truncation = true;
    TruncationPolicy truncation;  // used when use_default_truncation is false
};

/// Numerical landscape of one catalog row. Deterministic regardless of thread count.
Landscape scan(ModelClass cls, int row, const AxisSpec& alpha_axis, const AxisSpec& beta_axis,
               Picture picture, const IntegratorConfig& cfg = {}, const ScanOptions& options = {});

/// Same, for an arbitrary class member; amplitudes of `model` are replaced per node.
Landscape scan_model(const ModelPair& model, const AxisSpec& alpha_axis, const AxisSpec& beta_axis,
                     Picture picture, const IntegratorConfig& cfg = {}, const ScanOptions& options = {});

void save_csv(const Landscape& landscape, std::ostream& os);
void save_csv(const Landscape& landscape, const std::filesystem::path& path);
Landscape load_csv(std::istream& is);
Landscape load_csv(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255), P in [0, 1] mapped linearly; the top image row is the largest beta.
void render_pgm(const Landscape& landscape, std::ostream& os);
void render_pgm(const Landscape& landscape, const std::filesystem::path& path);

/// Physical inputs (Omega0/2pi and Delta0/2pi in MHz, tau in ns) to class parameters.
double class_parameter_from_mhz(double freq_mhz, double tau_ns);

}  // namespace isoprob
