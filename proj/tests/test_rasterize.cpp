#include "ts2img/rasterize.hpp"

#include "ts2img/font.hpp"
#include "ts2img/rng.hpp"
#include "ts2img/sha256.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace ts2img;

namespace {

PlotImage blank(int w, int h) {
    PlotImage img;
    img.spec.width_px = w;
    img.spec.height_px = h;
    img.pixels.assign(std::size_t(w) * h * 3, 1.0f);
    return img;
}

double dist_point_segment(double px, double py, const std::array<double, 2>& a,
                          const std::array<double, 2>& b) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((px - a[0]) * dx + (py - a[1]) * dy) / len2, 0.0, 1.0);
    const double cx = a[0] + t * dx - px, cy = a[1] + t * dy - py;
    return std::sqrt(cx * cx + cy * cy);
}

// Independent coverage estimate: 16x16 regular subsampling of each pixel
// square against the union of capsules.
double coverage_oracle(int x, int y, const std::vector<std::array<double, 2>>& pts, double width) {
    const double r = width / 2.0;
    int inside = 0;
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) {
            const double sx = x - 0.5 + (i + 0.5) / 16.0;
            const double sy = y - 0.5 + (j + 0.5) / 16.0;
            bool hit = false;
            for (std::size_t s = 0; s + 1 < pts.size() && !hit; ++s)
                hit = dist_point_segment(sx, sy, pts[s], pts[s + 1]) <= r;
            inside += hit;
        }
    return inside / 256.0;
}

} // namespace

TEST_CASE("nice_ticks picks 1-2-5 steps covering the range") {
    CHECK(nice_ticks(0.0, 10.0, 6) == std::vector<double>{0, 2, 4, 6, 8, 10});
    CHECK(nice_ticks(0.0, 1.0, 6) == std::vector<double>{0.0, 0.2, 0.4, 0.6, 0.8, 1.0});
    CHECK(nice_ticks(0.0, 100.0, 3) == std::vector<double>{0, 50, 100});

    auto t = nice_ticks(-3.7, 14.2, 6);
    CHECK(t.front() <= -3.7);
    CHECK(t.back() >= 14.2);
    for (std::size_t i = 1; i < t.size(); ++i)
        CHECK(t[i] - t[i - 1] == doctest::Approx(t[1] - t[0]));

    // Degenerate range widens to +-max(0.5, 0.1|v|) first.
    auto d = nice_ticks(5.0, 5.0, 6);
    CHECK(d.front() <= 4.5);
    CHECK(d.back() >= 5.5);

    CHECK_THROWS_AS(nice_ticks(1.0, 0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(nice_ticks(0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("nice_ticks step sizes are always from the 1-2-5 family") {
    CounterRng rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const double lo = 1000.0 * (2.0 * rng.next_double() - 1.0);
        const double span = std::pow(10.0, 6.0 * rng.next_double() - 3.0);
        const int target = 3 + int(rng.next_below(8));
        auto t = nice_ticks(lo, lo + span, target);
        REQUIRE(t.size() >= 2);
        CHECK(t.front() <= lo + 1e-9 * span);
        CHECK(t.back() >= lo + span - 1e-9 * span);
        const double step = t[1] - t[0];
        const double mant = step / std::pow(10.0, std::floor(std::log10(step) + 1e-12));
        const bool ok125 = std::abs(mant - 1.0) < 1e-6 || std::abs(mant - 2.0) < 1e-6 ||
                           std::abs(mant - 5.0) < 1e-6 || std::abs(mant - 10.0) < 1e-6;
        CHECK(ok125);
    }
}

TEST_CASE("log ticks sit on integer decades") {
    CHECK(nice_ticks_log10(1.0, 1000.0) == std::vector<double>{1, 10, 100, 1000});
    CHECK(nice_ticks_log10(0.01, 1.0) == std::vector<double>{0.01, 0.1, 1});
    auto t = nice_ticks_log10(3.0, 500.0);
    CHECK(t == std::vector<double>{1, 10, 100, 1000});
    CHECK_THROWS_AS(nice_ticks_log10(0.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(nice_ticks_log10(-1.0, 10.0), std::invalid_argument);
}

TEST_CASE("tick labels are short decimals with e-notation past 4 digits") {
    CHECK(format_tick_label(0.0) == "0");
    CHECK(format_tick_label(2.0) == "2");
    CHECK(format_tick_label(2.5) == "2.5");
    CHECK(format_tick_label(-0.4) == "-0.4");
    CHECK(format_tick_label(10.0) == "10");
    CHECK(format_tick_label(1234.0) == "1234");
    CHECK(format_tick_label(0.001) == "0.001");
    CHECK(format_tick_label(0.30000000000000004) == "0.3");
    CHECK(format_tick_label(12500.0) == "1.25e+4");
    CHECK(format_tick_label(100000.0) == "1e+5");
    CHECK(format_tick_label(0.00002) == "2e-5");
    CHECK(format_tick_label(-3.0e6) == "-3e+6");
    // Every emitted character has a glyph.
    for (double v : {0.0, 2.5, -17.25, 1e8, -2.5e-7, 3333.0, 0.125})
        for (char c : format_tick_label(v)) CHECK(font::has_glyph(c));
}

TEST_CASE("data_to_pixel maps limits onto the axes box") {
    PlotSpec spec;
    const AxesBoxPx box = axes_box_px(spec);
    const PlotLimits lim{0.0, 10.0, -1.0, 1.0};

    auto p0 = data_to_pixel(0.0, 0.0, lim, spec);
    CHECK(p0[0] == doctest::Approx(box.x0));
    CHECK(p0[1] == doctest::Approx((box.y0 + box.y1) / 2.0)); // y midpoint -> vertical center

    auto p1 = data_to_pixel(10.0, 1.0, lim, spec);
    CHECK(p1[0] == doctest::Approx(box.x1));
    CHECK(p1[1] == doctest::Approx(box.y0)); // max y -> top row

    // Monotone in t.
    CHECK(data_to_pixel(3.0, 0.0, lim, spec)[0] < data_to_pixel(7.0, 0.0, lim, spec)[0]);
}

TEST_CASE("data_to_pixel log mode") {
    PlotSpec spec;
    spec.x_scale = XScale::log10;
    const AxesBoxPx box = axes_box_px(spec);
    const PlotLimits lim{0.0, 2.0, 0.0, 1.0}; // log10 space: [1, 100]

    auto mid = data_to_pixel(10.0, 0.5, lim, spec);
    CHECK(mid[0] == doctest::Approx((box.x0 + box.x1) / 2.0));
    CHECK_THROWS_AS(data_to_pixel(0.0, 0.5, lim, spec), std::invalid_argument);
    CHECK_THROWS_AS(data_to_pixel(-3.0, 0.5, lim, spec), std::invalid_argument);

    // Uniform in log space: log-spaced points land uniformly spaced.
    const double x_a = data_to_pixel(1.0, 0.5, lim, spec)[0];
    const double x_b = data_to_pixel(std::pow(10.0, 0.5), 0.5, lim, spec)[0];
    const double x_c = data_to_pixel(10.0, 0.5, lim, spec)[0];
    CHECK(x_b - x_a == doctest::Approx(x_c - x_b).epsilon(1e-9));
}

TEST_CASE("horizontal segment on an integer row paints a solid run") {
    auto img = blank(64, 32);
    draw_polyline(img, {{10.0, 16.0}, {50.0, 16.0}}, Rgb{255, 0, 0}, 1.5);
    for (int x = 12; x <= 48; ++x) {
        CHECK(img.at(16, x, 0) == 1.0f);   // red channel: full color
        CHECK(img.at(16, x, 1) == 0.0f);   // green fully replaced
    }
    // Rows two away stay untouched.
    for (int x = 12; x <= 48; ++x) CHECK(img.at(14, x, 1) == 1.0f);
}

TEST_CASE("45-degree diagonal anchors full-coverage pixels with an AA fringe") {
    auto img = blank(64, 64);
    draw_polyline(img, {{10.0, 10.0}, {40.0, 40.0}}, Rgb{0, 0, 0}, 1.5);
    int full = 0, fringe = 0;
    for (int d = 12; d <= 38; ++d) {
        if (img.at(d, d, 0) == 0.0f) ++full; // on-diagonal pixel fully covered
        const float off = img.at(d, d + 1, 0);
        if (off > 0.0f && off < 1.0f) ++fringe;
    }
    CHECK(full == 27);
    CHECK(fringe == 27);
}

TEST_CASE("polyline coverage tracks a 16x supersampled oracle") {
    CounterRng rng(51);
    for (int trial = 0; trial < 8; ++trial) {
        auto img = blank(48, 48);
        std::vector<std::array<double, 2>> pts;
        const int n = 3 + int(rng.next_below(4));
        for (int i = 0; i < n; ++i)
            pts.push_back({4.0 + 40.0 * rng.next_double(), 4.0 + 40.0 * rng.next_double()});
        const double width = 1.0 + 2.0 * rng.next_double();
        draw_polyline(img, pts, Rgb{0, 0, 0}, width);

        double worst = 0.0;
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 48; ++x) {
                const double got = 1.0 - img.at(y, x, 0); // black on white
                const double want = coverage_oracle(x, y, pts, width);
                worst = std::max(worst, std::abs(got - want));
            }
        CHECK(worst < 0.08);
    }
}

TEST_CASE("polyline respects its clip rectangle") {
    auto img = blank(64, 64);
    draw_polyline(img, {{0.0, 20.0}, {63.0, 20.0}}, Rgb{0, 0, 0}, 3.0, ClipRect{16, 47, 16, 47});
    CHECK(img.at(20, 15, 0) == 1.0f);
    CHECK(img.at(20, 16, 0) < 1.0f);
    CHECK(img.at(20, 47, 0) < 1.0f);
    CHECK(img.at(20, 48, 0) == 1.0f);
}

TEST_CASE("polyline skips non-finite joints without erroring") {
    auto img = blank(32, 32);
    const double nan = std::nan("");
    draw_polyline(img, {{4.0, 8.0}, {12.0, 8.0}, {nan, nan}, {20.0, 8.0}, {28.0, 8.0}},
                  Rgb{0, 0, 0}, 1.5);
    CHECK(img.at(8, 8, 0) == 0.0f);
    CHECK(img.at(8, 16, 0) == 1.0f); // gap where the NaN sat
    CHECK(img.at(8, 24, 0) == 0.0f);

    CHECK_THROWS_AS(draw_polyline(img, {{1.0, 1.0}}, Rgb{0, 0, 0}, 1.0), std::invalid_argument);
}

TEST_CASE("draw_label stamps the font table exactly") {
    auto img = blank(32, 16);
    draw_label(img, "0", 3, 2, Rgb{0, 0, 0});
    for (int gy = 0; gy < font::glyph_height; ++gy)
        for (int gx = 0; gx < font::glyph_width; ++gx) {
            const bool ink = font::glyph_pixel('0', gx, gy);
            CHECK(img.at(2 + gy, 3 + gx, 0) == (ink ? 0.0f : 1.0f));
        }
    CHECK_THROWS_AS(draw_label(img, "x", 0, 0, Rgb{0, 0, 0}), std::invalid_argument);
}

TEST_CASE("label width follows glyph metrics") {
    CHECK(font::text_width("") == 0);
    CHECK(font::text_width("7") == 6);
    CHECK(font::text_width("1.5") == 3 * 6 + 2);

    // Rendered extent matches: ink appears within the advertised width only.
    auto img = blank(64, 16);
    draw_label(img, "1.5", 5, 3, Rgb{0, 0, 0});
    int min_x = 64, max_x = -1;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 64; ++x)
            if (img.at(y, x, 0) == 0.0f) {
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
            }
    CHECK(min_x >= 5);
    CHECK(max_x < 5 + font::text_width("1.5"));
}

TEST_CASE("render_plot produces a 432x288 deterministic image") {
    TimeSeries s;
    for (int i = 0; i < 100; ++i) s.values.push_back(std::sin(0.17 * i));
    PlotSpec spec;

    const PlotImage a = render_plot({s}, spec);
    CHECK(a.spec.width_px == 432);
    CHECK(a.spec.height_px == 288);
    CHECK(a.pixels.size() == 432u * 288u * 3u);
    for (float v : a.pixels) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }

    const PlotImage b = render_plot({s}, spec);
    CHECK(quantize(a).pixels == quantize(b).pixels);
}

TEST_CASE("render_plot validates its inputs") {
    PlotSpec spec;
    CHECK_THROWS_AS(render_plot({}, spec), std::invalid_argument);

    TimeSeries all_nan;
    all_nan.values = {std::nan(""), std::nan("")};
    CHECK_THROWS_AS(render_plot({all_nan}, spec), std::invalid_argument);

    TimeSeries one_point;
    one_point.values = {1.0};
    CHECK_THROWS_AS(render_plot({one_point}, spec), std::invalid_argument);

    TimeSeries bad_ts;
    bad_ts.values = {1.0, 2.0, 3.0};
    bad_ts.timestamps = {0.0, 2.0, 1.0};
    CHECK_THROWS_AS(render_plot({bad_ts}, spec), std::invalid_argument);

    TimeSeries for_log;
    for_log.values = {1.0, 2.0, 3.0};
    PlotSpec log_spec;
    log_spec.x_scale = XScale::log10;
    // Implicit indices start at 0, which a log axis cannot place.
    CHECK_THROWS_AS(render_plot({for_log}, log_spec), std::invalid_argument);
    for_log.timestamps = {1.0, 10.0, 100.0};
    CHECK_NOTHROW(render_plot({for_log}, log_spec));
}

TEST_CASE("render_plot keeps ink inside the canvas and curves inside the box") {
    // A constant series exercises the degenerate-range widening; a spiky one
    // exercises clipping at the box edges.
    TimeSeries flat;
    flat.values.assign(50, 3.0);
    TimeSeries spiky;
    for (int i = 0; i < 50; ++i) spiky.values.push_back(i % 7 == 0 ? 40.0 : -2.0);

    PlotSpec spec;
    const PlotImage img = render_plot({flat, spiky}, spec);
    const AxesBoxPx box = axes_box_px(spec);

    // The second series' color must not appear outside the axes box.
    const float r2 = 255.0f / 255.0f, g2 = 127.0f / 255.0f;
    for (int y = 0; y < spec.height_px; ++y)
        for (int x = 0; x < spec.width_px; ++x) {
            const bool inside =
                x >= box.x0 && x <= box.x1 && y >= box.y0 && y <= box.y1;
            if (inside) continue;
            const bool orange = std::abs(img.at(y, x, 0) - r2) < 0.1f &&
                                std::abs(img.at(y, x, 1) - g2) < 0.1f &&
                                img.at(y, x, 2) < 0.4f;
            CHECK_FALSE(orange);
        }
}

TEST_CASE("variable-length series render without resampling") {
    TimeSeries short_s, long_s;
    for (int i = 0; i < 50; ++i) short_s.values.push_back(std::cos(0.3 * i));
    for (int i = 0; i < 5000; ++i) long_s.values.push_back(std::cos(0.003 * i));
    PlotSpec spec;
    CHECK_NOTHROW(render_plot({short_s}, spec));
    CHECK_NOTHROW(render_plot({long_s}, spec));
}
