#include <doctest.h>

#include <chrono>
#include <cmath>

#include "isoprob/alignment.hpp"
#include "isoprob/errors.hpp"

using namespace isoprob;

namespace {

const Landscape& aeh_map() {
    static const Landscape l = scan(ModelClass::aeh, 8, {0.0, 3.0, 101}, {-2.0, 2.0, 101}, Picture::detuning);
    return l;
}

Grid ramp(std::size_t rows, std::size_t cols, double c1, double c2) {
    Grid g(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) g(i, j) = c1 * static_cast<double>(i) + c2 * static_cast<double>(j);
    return g;
}

AlignBounds box(int shift, int trim) { return {shift, shift, trim, trim}; }

}  // namespace

TEST_CASE("bilinear resampling") {
    SUBCASE("reproduces a bilinear ramp") {
        // value at source index (i, j) = 0.3 i - 0.7 j; target nodes map to u = i (n_in - 1)/(n_out - 1)
        const Grid g = ramp(11, 7, 0.3, -0.7);
        const Grid r = resample_bilinear(g, 41, 25);
        for (std::size_t i = 0; i < 41; ++i)
            for (std::size_t j = 0; j < 25; ++j) {
                const double u = i * 10.0 / 40.0, v = j * 6.0 / 24.0;
                CHECK(std::fabs(r(i, j) - (0.3 * u - 0.7 * v)) < 1e-12);
            }
    }
    SUBCASE("constant stays constant, corners exact, no overshoot") {
        const Grid c = resample_bilinear(Grid(5, 5, 0.37), 13, 9);
        for (double v : c.values) CHECK(v == 0.37);
        const Grid& g = aeh_map().grid;
        const Grid r = resample_bilinear(g, 37, 53);
        CHECK(r(0, 0) == g(0, 0));
        CHECK(r(36, 52) == g(100, 100));
        CHECK(r(0, 52) == g(0, 100));
        CHECK(r(36, 0) == g(100, 0));
        for (double v : r.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    SUBCASE("down and up again on a smooth landscape") {
        auto round_trip_error = [](const Landscape& l) {
            const Landscape back = resample_bilinear(resample_bilinear(l, 51, 51), 101, 101);
            CHECK(back.alpha_axis.stop == l.alpha_axis.stop);
            CHECK(back.beta_axis.count == 101);
            CHECK_NOTHROW(back.validate());
            double worst = 0.0;
            for (std::size_t k = 0; k < l.grid.values.size(); ++k)
                worst = std::max(worst, std::fabs(back.grid.values[k] - l.grid.values[k]));
            return worst;
        };
        const Landscape inner = scan(ModelClass::aeh, 8, {0.0, 2.0, 101}, {-2.0, 2.0, 101}, Picture::detuning);
        CHECK(round_trip_error(inner) < 0.02);
        // denser fringes up to alpha = 3: midpoint interpolation error h^2 P'' / 8 measured at 0.0234
        CHECK(round_trip_error(aeh_map()) < 0.025);
    }
    CHECK_THROWS_AS(resample_bilinear(Grid(3, 3), 1, 5), ContractError);
}

TEST_CASE("mse") {
    const Grid a = ramp(6, 5, 0.01, 0.02);
    Grid b = a;
    CHECK(mse(a, b) == 0.0);
    for (double& v : b.values) v += 0.1;
    CHECK(mse(a, b) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK_THROWS_AS(mse(a, Grid(5, 6)), ContractError);
}

TEST_CASE("objective") {
    const Grid& a = aeh_map().grid;
    const Grid b = shifted(a, 3, 5);
    CHECK(objective(a, b, AlignParams{}) == mse(a, b));
    AlignParams p;
    p.dx = 3;
    p.dy = 5;
    CHECK(objective(a, b, p) == 0.0);

    // overlap reduced to the single pixel a(0, 0) vs b(0, 0)
    const Grid c = ramp(4, 3, 0.1, 0.2);
    const Grid d = ramp(4, 3, 0.2, 0.1);
    AlignParams one;
    one.trims[a_right] = 2;
    one.trims[a_top] = 3;
    CHECK(objective(c, d, one) == 0.0);
    one.trims = {1, 1, 1, 2, 0, 0, 0, 0};  // a(1, 1) only
    const double diff = c(1, 1) - d(1, 1);
    CHECK(objective(c, d, one) == doctest::Approx(diff * diff).epsilon(1e-15));

    AlignParams empty;
    empty.dx = 3;
    CHECK_THROWS_AS(objective(c, d, empty), DomainError);
}

TEST_CASE("objective is symmetric under swapping maps") {
    const Grid& a = aeh_map().grid;
    const Grid b = with_noise(shifted(a, -2, 4), 0.05, 9);
    AlignParams p;
    p.dx = -3;
    p.dy = 2;
    p.trims = {1, 0, 2, 3, 0, 4, 1, 2};
    AlignParams q;
    q.dx = -p.dx;
    q.dy = -p.dy;
    for (int k = 0; k < 4; ++k) {
        q.trims[k] = p.trims[k + 4];
        q.trims[k + 4] = p.trims[k];
    }
    CHECK(objective(a, b, p) == doctest::Approx(objective(b, a, q)).epsilon(1e-13));
}

TEST_CASE("bounds") {
    const AlignBounds b = AlignBounds::fraction(101, 201, 5.0);
    CHECK(b.shift_y == 5);
    CHECK(b.trim_y == 5);
    CHECK(b.shift_x == 10);
    CHECK(b.trim_x == 10);
    AlignParams p;
    p.dx = 10;
    CHECK(b.contains(p));
    p.dy = -6;
    CHECK_FALSE(b.contains(p));
    CHECK_THROWS_AS(align(Grid(3, 3), Grid(3, 3), box(-1, 0)), ContractError);
    CHECK_THROWS_AS(align(Grid(3, 3), Grid(3, 4), box(1, 1)), ContractError);
}

TEST_CASE("align of identical maps returns zero") {
    const Grid& a = aeh_map().grid;
    const AlignmentResult r = align(a, a, AlignBounds::fraction(101, 101));
    CHECK(r.params == AlignParams{});
    CHECK(r.mse_pre == 0.0);
    CHECK(r.mse_post == 0.0);
    CHECK(r.overlap_size == 101 * 101);
}

TEST_CASE("align recovers an exact shift") {
    const Grid& a = aeh_map().grid;
    for (auto [vx, vy] : {std::pair{7, -4}, std::pair{-3, 5}, std::pair{0, 2}, std::pair{-9, -9}}) {
        CAPTURE(vx);
        CAPTURE(vy);
        const AlignmentResult r = align(a, shifted(a, vx, vy), box(10, 5));
        CHECK(r.params.dx == vx);
        CHECK(r.params.dy == vy);
        CHECK(r.mse_post < 1e-15);
        CHECK(r.mse_post <= r.mse_pre + 1e-15);
    }
}

TEST_CASE("noisy shift: registration within a pixel at the noise floor") {
    const Grid& a = aeh_map().grid;
    const double sigma = 0.02;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Grid b = with_noise(shifted(a, 7, -4), sigma, seed);
        AlignConfig cfg;
        cfg.keep_difference_map = true;
        const AlignmentResult r = align(a, b, box(10, 5), cfg);
        CHECK(std::abs(r.params.dx - 7) <= 1);
        CHECK(std::abs(r.params.dy + 4) <= 1);
        CHECK(r.mse_post >= 0.8 * sigma * sigma);
        CHECK(r.mse_post <= 1.5 * sigma * sigma);
        CHECK(r.mse_pre / r.mse_post >= 4.0);
        REQUIRE(r.difference_map.has_value());
        CHECK(r.difference_map->values.size() == r.overlap_size);
    }
}

TEST_CASE("improvement factor for moderate shifts") {
    const Grid& a = aeh_map().grid;
    for (auto [vx, vy] : {std::pair{3, 0}, std::pair{0, -3}, std::pair{4, 3}, std::pair{-5, -3}}) {
        CAPTURE(vx);
        CAPTURE(vy);
        const AlignmentResult r = align(a, with_noise(shifted(a, vx, vy), 0.02, 5), box(8, 5));
        CHECK(r.mse_pre / r.mse_post >= 4.0);
    }
}

TEST_CASE("post-alignment error never exceeds the unaligned one") {
    const Grid& a = aeh_map().grid;
    const Grid other = scan(ModelClass::lmsz, 1, {0.0, 3.0, 101}, {-2.0, 2.0, 101}, Picture::detuning).grid;
    const AlignmentResult r = align(a, other, AlignBounds::fraction(101, 101));
    CHECK(r.mse_post <= r.mse_pre + 1e-15);
    CHECK(AlignBounds::fraction(101, 101).contains(r.params));
}
