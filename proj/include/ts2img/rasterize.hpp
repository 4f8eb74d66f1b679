#ifndef TS2IMG_RASTERIZE_HPP
#define TS2IMG_RASTERIZE_HPP

#include "ts2img/png_io.hpp"

#include <array>
#include <string>
#include <vector>

namespace ts2img {

// One sequence to draw. Empty timestamps mean implicit indices 0..n-1;
// explicit timestamps must be strictly increasing and as long as values.
// NaN values break the curve instead of erroring.
struct TimeSeries {
    std::vector<double> values;
    std::vector<double> timestamps;
    std::string name;

    void validate_for_plot() const;
};

enum class XScale { linear, log10 };

using Rgb = std::array<std::uint8_t, 3>;

struct PlotSpec {
    int width_px = 432;
    int height_px = 288;
    // Fractions of the canvas: the axes box spans [left,right] x [bottom,top]
    // with y measured upward from the bottom of the image.
    double box_left = 0.125;
    double box_right = 0.9;
    double box_bottom = 0.11;
    double box_top = 0.88;
    XScale x_scale = XScale::linear;
    std::vector<Rgb> palette{{31, 119, 180}, {255, 127, 14}};
    double line_width_px = 1.5;
    Rgb background{255, 255, 255};
    double data_margin = 0.05;

    void validate() const;
};

// Floating-point canvas; values stay in [0,1]. Integer pixel coordinates
// address pixel centers (pixel (x,y) covers [x-0.5,x+0.5) x [y-0.5,y+0.5)),
// row 0 at the top.
struct PlotImage {
    PlotSpec spec;
    std::vector<float> pixels; // height x width x 3

    float& at(int y, int x, int c) { return pixels[(std::size_t(y) * spec.width_px + x) * 3 + c]; }
    float at(int y, int x, int c) const {
        return pixels[(std::size_t(y) * spec.width_px + x) * 3 + c];
    }
};

// Round-to-nearest 8-bit quantization; the serialized form of a plot.
Image8 quantize(const PlotImage& img);

// Tick values at multiples of {1,2,5}*10^k whose count is closest to
// target_count; the first tick is <= lo and the last >= hi. A degenerate
// lo == hi is first widened to lo +- max(0.5, 0.1*|lo|).
std::vector<double> nice_ticks(double lo, double hi, int target_count);

// Integer-decade ticks 10^k covering [lo, hi]; requires lo, hi > 0.
std::vector<double> nice_ticks_log10(double lo, double hi);

// Shortest decimal with at most 4 significant digits; 'e' notation once the
// exponent magnitude reaches 4. Uses only the embedded glyph set.
std::string format_tick_label(double v);

// Axes box edges in integer pixel coordinates (x0 < x1 left/right columns,
// y0 < y1 top/bottom rows).
struct AxesBoxPx {
    int x0, x1, y0, y1;
};
AxesBoxPx axes_box_px(const PlotSpec& spec);

// Data limits in plotting space: t is log10-transformed already in log mode.
struct PlotLimits {
    double t_lo, t_hi, y_lo, y_hi;
};

// Affine map of one data point into the axes box; y grows downward in pixel
// space. In log mode t must be positive (it is log10-transformed here).
std::array<double, 2> data_to_pixel(double t, double y, const PlotLimits& limits,
                                    const PlotSpec& spec);

// Anti-aliased polyline: coverage-weighted blend of color over the canvas,
// sampled 4x4 per pixel against the union of round-capped segments, so
// overlapping segments of one curve never double-blend. Points use pixel
// coordinates; non-finite points split the curve. Painting is limited to
// the clip rectangle (pixel index bounds, inclusive).
struct ClipRect {
    int x0, x1, y0, y1;
};
void draw_polyline(PlotImage& img, const std::vector<std::array<double, 2>>& points,
                   const Rgb& color, double width_px, const ClipRect& clip);
void draw_polyline(PlotImage& img, const std::vector<std::array<double, 2>>& points,
                   const Rgb& color, double width_px);

// Stamps text from the embedded font, top-left cell corner at (x, y),
// opaque ink, no anti-aliasing. Throws on characters without a glyph.
void draw_label(PlotImage& img, const std::string& text, int x, int y, const Rgb& color);

// Full deterministic plot: background, frame, ticks, numeric labels, then
// every series in palette order, auto-ranged with data_margin padding.
PlotImage render_plot(const std::vector<TimeSeries>& series, const PlotSpec& spec);

} // namespace ts2img

#endif
