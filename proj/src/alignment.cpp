#include "isoprob/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include "isoprob/errors.hpp"

namespace isoprob {

namespace {

struct Rect {
    long r0 = 0, r1 = 0, c0 = 0, c1 = 0;
    bool empty() const { return r0 >= r1 || c0 >= c1; }
    std::size_t size() const { return empty() ? 0 : static_cast<std::size_t>((r1 - r0) * (c1 - c0)); }
};

// Overlap in a's coordinates.
Rect overlap(std::size_t rows, std::size_t cols, const AlignParams& p) {
    const long R = static_cast<long>(rows), C = static_cast<long>(cols);
    const auto& t = p.trims;
    Rect r;
    r.r0 = std::max<long>(t[a_bottom], t[b_bottom] - p.dy);
    r.r1 = std::min<long>(R - t[a_top], R - t[b_top] - p.dy);
    r.c0 = std::max<long>(t[a_left], t[b_left] - p.dx);
    r.c1 = std::min<long>(C - t[a_right], C - t[b_right] - p.dx);
    return r;
}

void require_same_shape(const Grid& a, const Grid& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw ContractError("maps differ in shape (" + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                            " vs " + std::to_string(b.rows) + "x" + std::to_string(b.cols) + ")");
    if (a.rows == 0 || a.cols == 0) throw ContractError("maps are empty");
}

// Summed-area table of squared differences for one shift, so that any trim
// combination costs O(1).
class ShiftTable {
public:
    ShiftTable(const Grid& a, const Grid& b) : a_(a), b_(b) {}

    double mse(const AlignParams& p, const Rect& r) {
        if (!built_ || p.dx != dx_ || p.dy != dy_) build(p.dx, p.dy);
        const auto at = [&](long i, long j) { return sat_[static_cast<std::size_t>(i - r0_) * (w_ + 1) + (j - c0_)]; };
        const double sum = at(r.r1, r.c1) - at(r.r0, r.c1) - at(r.r1, r.c0) + at(r.r0, r.c0);
        return std::max(0.0, sum) / static_cast<double>(r.size());
    }

private:
    void build(int dx, int dy) {
        const long R = static_cast<long>(a_.rows), C = static_cast<long>(a_.cols);
        r0_ = std::max<long>(0, -dy);
        c0_ = std::max<long>(0, -dx);
        const long r1 = std::min<long>(R, R - dy), c1 = std::min<long>(C, C - dx);
        const long h = std::max<long>(0, r1 - r0_);
        w_ = std::max<long>(0, c1 - c0_);
        sat_.assign(static_cast<std::size_t>((h + 1) * (w_ + 1)), 0.0);
        for (long i = 0; i < h; ++i) {
            double row = 0.0;
            for (long j = 0; j < w_; ++j) {
                const long r = r0_ + i, c = c0_ + j;
                const double d = a_(r, c) - b_(r + dy, c + dx);
                row += d * d;
                sat_[(i + 1) * (w_ + 1) + j + 1] = sat_[i * (w_ + 1) + j + 1] + row;
            }
        }
        dx_ = dx;
        dy_ = dy;
        built_ = true;
    }

    const Grid& a_;
    const Grid& b_;
    std::vector<double> sat_;
    long r0_ = 0, c0_ = 0, w_ = 0;
    int dx_ = 0, dy_ = 0;
    bool built_ = false;
};

// Lower MSE wins; near-equal values fall back to smaller L1 norm, then lexicographic order.
bool better(double m1, const AlignParams& p1, double m2, const AlignParams& p2) {
    const double tol = 1e-12 * std::max(m1, m2);
    if (m1 < m2 - tol) return true;
    if (m1 > m2 + tol) return false;
    if (p1.l1() != p2.l1()) return p1.l1() < p2.l1();
    return std::tie(p1.dx, p1.dy, p1.trims) < std::tie(p2.dx, p2.dy, p2.trims);
}

int& coordinate(AlignParams& p, int k) { return k == 0 ? p.dx : k == 1 ? p.dy : p.trims[k - 2]; }

std::pair<int, int> coordinate_range(const AlignBounds& b, int k) {
    if (k == 0) return {-b.shift_x, b.shift_x};
    if (k == 1) return {-b.shift_y, b.shift_y};
    const int t = k - 2;
    const bool horizontal = t == a_left || t == a_right || t == b_left || t == b_right;
    return {0, horizontal ? b.trim_x : b.trim_y};
}

}  // namespace

long AlignParams::l1() const {
    long s = std::abs(dx) + std::abs(dy);
    for (int t : trims) s += std::abs(t);
    return s;
}

AlignBounds AlignBounds::fraction(std::size_t rows, std::size_t cols, double pct) {
    if (!(pct >= 0.0 && pct <= 100.0)) throw ContractError("bounds percentage must lie in [0, 100]");
    AlignBounds b;
    b.shift_x = b.trim_x = static_cast<int>(std::floor(pct / 100.0 * static_cast<double>(cols)));
    b.shift_y = b.trim_y = static_cast<int>(std::floor(pct / 100.0 * static_cast<double>(rows)));
    return b;
}

bool AlignBounds::contains(const AlignParams& p) const {
    if (std::abs(p.dx) > shift_x || std::abs(p.dy) > shift_y) return false;
    for (int k = 0; k < 8; ++k) {
        const auto [lo, hi] = coordinate_range(*this, k + 2);
        if (p.trims[k] < lo || p.trims[k] > hi) return false;
    }
    return true;
}

void AlignBounds::validate() const {
    if (shift_x < 0 || shift_y < 0 || trim_x < 0 || trim_y < 0)
        throw ContractError("alignment bounds must be non-negative");
}

Grid resample_bilinear(const Grid& g, std::size_t rows, std::size_t cols) {
    if (rows < 2 || cols < 2) throw ContractError("resample target needs at least 2 nodes per axis");
    if (g.rows < 2 || g.cols < 2) throw ContractError("resample source needs at least 2 nodes per axis");
    Grid out(rows, cols);
    const auto locate = [](std::size_t i, std::size_t n_out, std::size_t n_in) {
        const double u = static_cast<double>(i) * static_cast<double>(n_in - 1) / static_cast<double>(n_out - 1);
        const std::size_t k = std::min(static_cast<std::size_t>(u), n_in - 2);
        return std::pair{k, u - static_cast<double>(k)};
    };
    for (std::size_t i = 0; i < rows; ++i) {
        const auto [r, t] = locate(i, rows, g.rows);
        for (std::size_t j = 0; j < cols; ++j) {
            const auto [c, s] = locate(j, cols, g.cols);
            const double v00 = g(r, c), v01 = g(r, c + 1), v10 = g(r + 1, c), v11 = g(r + 1, c + 1);
            const double v = (1.0 - t) * ((1.0 - s) * v00 + s * v01) + t * ((1.0 - s) * v10 + s * v11);
            out(i, j) = std::clamp(v, std::min({v00, v01, v10, v11}), std::max({v00, v01, v10, v11}));
        }
    }
    return out;
}

Landscape resample_bilinear(const Landscape& l, std::size_t n_alpha, std::size_t n_beta) {
    Landscape out = l;
    out.grid = resample_bilinear(l.grid, n_beta, n_alpha);
    out.alpha_axis.count = n_alpha;
    out.beta_axis.count = n_beta;
    return out;
}

double mse(const Grid& a, const Grid& b) {
    require_same_shape(a, b);
    return objective(a, b, AlignParams{});
}

double mse(const Landscape& a, const Landscape& b) { return mse(a.grid, b.grid); }

double objective(const Grid& a, const Grid& b, const AlignParams& p) {
    require_same_shape(a, b);
    const Rect r = overlap(a.rows, a.cols, p);
    if (r.empty()) throw DomainError("alignment overlap is empty");
    double sum = 0.0;
    for (long i = r.r0; i < r.r1; ++i)
        for (long j = r.c0; j < r.c1; ++j) {
            const double d = a(i, j) - b(i + p.dy, j + p.dx);
            sum += d * d;
        }
    return sum / static_cast<double>(r.size());
}

AlignmentResult align(const Grid& a, const Grid& b, const AlignBounds& bounds, const AlignConfig& config) {
    require_same_shape(a, b);
    bounds.validate();
    if (config.max_sweeps < 1) throw ContractError("max_sweeps must be positive");

    ShiftTable table(a, b);
    auto eval = [&](const AlignParams& p) -> std::optional<double> {
        const Rect r = overlap(a.rows, a.cols, p);
        if (r.empty()) return std::nullopt;
        return table.mse(p, r);
    };

    std::vector<AlignParams> starts{AlignParams{}};
    if (config.multistart && (bounds.shift_x > 0 || bounds.shift_y > 0)) {
        for (int sy : {-1, 1})
            for (int sx : {-1, 1}) {
                AlignParams p;
                p.dx = sx * bounds.shift_x;
                p.dy = sy * bounds.shift_y;
                if (std::find(starts.begin(), starts.end(), p) == starts.end()) starts.push_back(p);
            }
    }

    AlignParams best_p;
    double best_m = *eval(best_p);
    int total_sweeps = 0;
    for (const AlignParams& start : starts) {
        const auto m0 = eval(start);
        if (!m0) continue;
        AlignParams cur = start;
        double cur_m = *m0;
        for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
            ++total_sweeps;
            bool moved = false;
            for (int k = 0; k < 10; ++k) {
                const auto [lo, hi] = coordinate_range(bounds, k);
                AlignParams line_best = cur;
                double line_m = cur_m;
                for (int v = lo; v <= hi; ++v) {
                    AlignParams trial = cur;
                    coordinate(trial, k) = v;
                    if (trial == cur) continue;
                    const auto m = eval(trial);
                    if (m && better(*m, trial, line_m, line_best)) {
                        line_best = trial;
                        line_m = *m;
                    }
                }
                if (!(line_best == cur)) {
                    cur = line_best;
                    cur_m = line_m;
                    moved = true;
                }
            }
            if (!moved) break;
        }
        if (better(cur_m, cur, best_m, best_p)) {
            best_p = cur;
            best_m = cur_m;
        }
    }

    AlignmentResult res;
    res.mse_pre = mse(a, b);
    res.params = best_p;
    res.mse_post = objective(a, b, best_p);
    if (res.mse_post > res.mse_pre) {
        // Summed-area rounding picked a point no better than the identity.
        res.params = AlignParams{};
        res.mse_post = res.mse_pre;
    }
    res.sweeps = total_sweeps;
    const Rect r = overlap(a.rows, a.cols, res.params);
    res.overlap_size = r.size();
    if (config.keep_difference_map) {
        Grid d(static_cast<std::size_t>(r.r1 - r.r0), static_cast<std::size_t>(r.c1 - r.c0));
        for (long i = r.r0; i < r.r1; ++i)
            for (long j = r.c0; j < r.c1; ++j)
                d(i - r.r0, j - r.c0) = a(i, j) - b(i + res.params.dy, j + res.params.dx);
        res.difference_map = std::move(d);
    }
    return res;
}

AlignmentResult align(const Landscape& a, const Landscape& b, const AlignBounds& bounds,
                      const AlignConfig& config) {
    return align(a.grid, b.grid, bounds, config);
}

Grid shifted(const Grid& g, int vx, int vy, double fill) {
    Grid out(g.rows, g.cols, fill);
    const long R = static_cast<long>(g.rows), C = static_cast<long>(g.cols);
    for (long r = 0; r < R; ++r)
        for (long c = 0; c < C; ++c) {
            const long sr = r - vy, sc = c - vx;
            if (sr >= 0 && sr < R && sc >= 0 && sc < C) out(r, c) = g(sr, sc);
        }
    return out;
}

Grid with_noise(const Grid& g, double sigma, std::uint64_t seed, bool clamp) {
    if (!(sigma >= 0.0)) throw ContractError("noise sigma must be non-negative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    Grid out = g;
    for (double& v : out.values) {
        v += normal(rng);
        if (clamp) v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

}  // namespace isoprob
