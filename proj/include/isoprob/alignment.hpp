#pragma once

// Registration of two maps on a common grid by integer shifts of the second
// map and non-negative edge trims of both, minimizing the MSE over the overlap.
//
// Pixel (r, c) of a is compared with pixel (r + dy, c + dx) of b. Rows follow
// beta (row 0 = first beta node), columns follow alpha.

#include <array>
#include <cstdint>
#include <optional>

#include "isoprob/landscape.hpp"

namespace isoprob {

enum Trim { a_left, a_right, a_bottom, a_top, b_left, b_right, b_bottom, b_top };

struct AlignParams {
    int dx = 0;
    int dy = 0;
    std::array<int, 8> trims{};  // indexed by Trim

    long l1() const;
    bool operator==(const AlignParams&) const = default;
};

/// Inclusive limits: |dx| <= shift_x, |dy| <= shift_y, left/right trims <= trim_x,
/// bottom/top trims <= trim_y.
struct AlignBounds {
    int shift_x = 0;
    int shift_y = 0;
    int trim_x = 0;
    int trim_y = 0;

    /// pct percent of each dimension, rounded down, for shifts and trims alike.
    static AlignBounds fraction(std::size_t rows, std::size_t cols, double pct = 5.0);
    bool contains(const AlignParams& p) const;
    void validate() const;
};

struct AlignConfig {
    bool multistart = true;  // center plus the four shift-box corners
    int max_sweeps = 100;
    bool keep_difference_map = false;
};

struct AlignmentResult {
    AlignParams params;
    double mse_pre = 0.0;
    double mse_post = 0.0;
    std::size_t overlap_size = 0;
    std::optional<Grid> difference_map;  // a - shifted b over the overlap
    int sweeps = 0;
};

/// Bilinear resampling onto count_rows x count_cols nodes spanning the same extent.
Grid resample_bilinear(const Grid& g, std::size_t rows, std::size_t cols);
Landscape resample_bilinear(const Landscape& l, std::size_t n_alpha, std::size_t n_beta);

double mse(const Grid& a, const Grid& b);
double mse(const Landscape& a, const Landscape& b);

/// MSE over the overlap selected by params. Throws DomainError when empty.
double objective(const Grid& a, const Grid& b, const AlignParams& params);

AlignmentResult align(const Grid& a, const Grid& b, const AlignBounds& bounds,
                      const AlignConfig& config = {});
AlignmentResult align(const Landscape& a, const Landscape& b, const AlignBounds& bounds,
                      const AlignConfig& config = {});

// Synthetic fixtures for tests and demos.

/// b(r, c) = g(r - vy, c - vx), `fill` where the source is outside g.
Grid shifted(const Grid& g, int vx, int vy, double fill = 0.0);
/// Adds i.i.d. normal noise; clamp keeps the values inside [0, 1].
Grid with_noise(const Grid& g, double sigma, std::uint64_t seed, bool clamp = false);

}  // namespace isoprob
