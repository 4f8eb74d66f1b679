#include "ts2img/rasterize.hpp"

#include "ts2img/font.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ts2img {

void TimeSeries::validate_for_plot() const {
    if (values.size() < 2)
        throw std::invalid_argument("series needs at least 2 points to plot");
    if (!timestamps.empty()) {
        if (timestamps.size() != values.size())
            throw std::invalid_argument("timestamps and values must have equal length");
        for (std::size_t i = 0; i < timestamps.size(); ++i) {
            if (!std::isfinite(timestamps[i]))
                throw std::invalid_argument("timestamps must be finite");
            if (i && !(timestamps[i] > timestamps[i - 1]))
                throw std::invalid_argument("timestamps must be strictly increasing");
        }
    }
    bool any_finite = false;
    for (double v : values) any_finite |= std::isfinite(v);
    if (!any_finite) throw std::invalid_argument("series has no finite values");
}

void PlotSpec::validate() const {
    if (width_px <= 0 || height_px <= 0)
        throw std::invalid_argument("plot canvas must be positive-sized");
    if (!(0.0 <= box_left && box_left < box_right && box_right <= 1.0))
        throw std::invalid_argument("axes box: need 0 <= left < right <= 1");
    if (!(0.0 <= box_bottom && box_bottom < box_top && box_top <= 1.0))
        throw std::invalid_argument("axes box: need 0 <= bottom < top <= 1");
    if (palette.empty()) throw std::invalid_argument("palette must not be empty");
    if (!(line_width_px > 0.0)) throw std::invalid_argument("line width must be positive");
    if (!(data_margin >= 0.0)) throw std::invalid_argument("data margin must be non-negative");
}

Image8 quantize(const PlotImage& img) {
    Image8 out(img.spec.width_px, img.spec.height_px, 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const float v = std::min(1.0f, std::max(0.0f, img.pixels[i]));
        out.pixels[i] = std::uint8_t(std::lround(v * 255.0f));
    }
    return out;
}

namespace {

// lo == hi carries no scale; widen it the way a plot needs.
void widen_degenerate(double& lo, double& hi) {
    if (lo == hi) {
        const double d = std::max(0.5, 0.1 * std::abs(lo));
        lo -= d;
        hi += d;
    }
}

} // namespace

namespace {

double exact_pow10(int k) {
    double p = 1.0;
    for (int i = 0; i < std::abs(k); ++i) p *= 10.0;
    return p;
}

// n * 10^k with correct rounding: negative exponents divide by the exactly
// representable power so ticks land on the closest double to their decimal
// value (3 * 0.2 drifts; 6/10 does not).
double decimal_value(long long n, int k) {
    return k >= 0 ? double(n) * exact_pow10(k) : double(n) / exact_pow10(k);
}

} // namespace

std::vector<double> nice_ticks(double lo, double hi, int target_count) {
    if (!(lo <= hi)) throw std::invalid_argument("nice_ticks: need lo <= hi");
    if (target_count < 2) throw std::invalid_argument("nice_ticks: need target_count >= 2");
    widen_degenerate(lo, hi);

    // Candidate steps {1,2,5}*10^k near the raw step; pick the covering
    // tick count closest to the target.
    const double raw = (hi - lo) / (target_count - 1);
    const int base_k = int(std::floor(std::log10(raw)));
    int best_mult = 1, best_k = 0;
    double best_score = -1.0;
    for (int k = base_k - 1; k <= base_k + 1; ++k) {
        for (int mult : {1, 2, 5}) {
            const double step = decimal_value(mult, k);
            const double first = std::floor(lo / step);
            const double last = std::ceil(hi / step);
            const double count = last - first + 1.0;
            if (count < 2.0 || count > 1000.0) continue;
            const double score = std::abs(count - target_count);
            if (best_score < 0.0 || score < best_score) {
                best_mult = mult;
                best_k = k;
                best_score = score;
            }
        }
    }
    const double step = decimal_value(best_mult, best_k);
    const long long i0 = llround(std::floor(lo / step));
    const long long i1 = llround(std::ceil(hi / step));
    std::vector<double> ticks;
    ticks.reserve(std::size_t(i1 - i0 + 1));
    for (long long i = i0; i <= i1; ++i) ticks.push_back(decimal_value(i * best_mult, best_k));
    return ticks;
}

std::vector<double> nice_ticks_log10(double lo, double hi) {
    if (!(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("log ticks need positive limits");
    if (!(lo <= hi)) throw std::invalid_argument("nice_ticks: need lo <= hi");
    const long long e0 = llround(std::floor(std::log10(lo)));
    const long long e1 = llround(std::ceil(std::log10(hi)));
    std::vector<double> ticks;
    for (long long e = e0; e <= e1; ++e) ticks.push_back(std::pow(10.0, double(e)));
    return ticks;
}

std::string format_tick_label(double v) {
    if (v == 0.0) return "0";
    if (!std::isfinite(v)) throw std::invalid_argument("tick label must be finite");

    const int e = int(std::floor(std::log10(std::abs(v))));
    char buf[48];
    std::string s;
    if (e >= 4 || e <= -4) {
        std::snprintf(buf, sizeof buf, "%.3e", v);
        s = buf;
        // Trim zero mantissa decimals: "2.000e+05" -> "2e+05".
        const auto epos = s.find('e');
        std::string mant = s.substr(0, epos), exp = s.substr(epos);
        while (mant.back() == '0') mant.pop_back();
        if (mant.back() == '.') mant.pop_back();
        // Drop an exponent leading zero: "e+05" -> "e+05" stays readable but
        // shorter form wins: "e+05" -> "e+5"? Keep snprintf's two digits off;
        // strip zeros after the sign.
        std::string sign(1, exp[1]);
        std::string digits = exp.substr(2);
        while (digits.size() > 1 && digits.front() == '0') digits.erase(digits.begin());
        s = mant + "e" + sign + digits;
    } else {
        const int decimals = std::max(0, 3 - e);
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
        s = buf;
        if (s.find('.') != std::string::npos) {
            while (s.back() == '0') s.pop_back();
            if (s.back() == '.') s.pop_back();
        }
    }
    if (s == "-0") s = "0";
    return s;
}

AxesBoxPx axes_box_px(const PlotSpec& spec) {
    AxesBoxPx box;
    box.x0 = int(std::lround(spec.box_left * (spec.width_px - 1)));
    box.x1 = int(std::lround(spec.box_right * (spec.width_px - 1)));
    box.y0 = int(std::lround((1.0 - spec.box_top) * (spec.height_px - 1)));
    box.y1 = int(std::lround((1.0 - spec.box_bottom) * (spec.height_px - 1)));
    return box;
}

std::array<double, 2> data_to_pixel(double t, double y, const PlotLimits& limits,
                                    const PlotSpec& spec) {
    if (!(limits.t_lo < limits.t_hi) || !(limits.y_lo < limits.y_hi))
        throw std::invalid_argument("plot limits must be non-degenerate");
    double tt = t;
    if (spec.x_scale == XScale::log10) {
        if (!(t > 0.0))
            throw std::invalid_argument("log-scale x requires positive time coordinates");
        tt = std::log10(t);
    }
    const AxesBoxPx box = axes_box_px(spec);
    const double u = (tt - limits.t_lo) / (limits.t_hi - limits.t_lo);
    const double v = (y - limits.y_lo) / (limits.y_hi - limits.y_lo);
    return {box.x0 + u * (box.x1 - box.x0), box.y1 - v * (box.y1 - box.y0)};
}

namespace {

void blend_pixel(PlotImage& img, int x, int y, const Rgb& color, double coverage) {
    if (coverage <= 0.0) return;
    const float a = float(coverage);
    for (int c = 0; c < 3; ++c) {
        float& px = img.at(y, x, c);
        px = (1.0f - a) * px + a * (float(color[c]) / 255.0f);
    }
}

void set_pixel(PlotImage& img, int x, int y, const Rgb& color) {
    if (x < 0 || x >= img.spec.width_px || y < 0 || y >= img.spec.height_px) return;
    for (int c = 0; c < 3; ++c) img.at(y, x, c) = float(color[c]) / 255.0f;
}

double dist2_point_segment(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
    const double cx = ax + t * dx - px, cy = ay + t * dy - py;
    return cx * cx + cy * cy;
}

} // namespace

void draw_polyline(PlotImage& img, const std::vector<std::array<double, 2>>& points,
                   const Rgb& color, double width_px, const ClipRect& clip) {
    if (points.size() < 2) throw std::invalid_argument("polyline needs at least 2 points");
    if (!(width_px > 0.0)) throw std::invalid_argument("line width must be positive");

    const int W = img.spec.width_px, H = img.spec.height_px;
    const int cx0 = std::max(0, clip.x0), cx1 = std::min(W - 1, clip.x1);
    const int cy0 = std::max(0, clip.y0), cy1 = std::min(H - 1, clip.y1);
    if (cx0 > cx1 || cy0 > cy1) return;

    const double r = width_px / 2.0;
    const double r2 = r * r;
    // Farthest a 16x16 subsample sits from its pixel center.
    const double sub_reach = std::sqrt(2.0) * (0.5 - 1.0 / 32.0);

    // Union-of-segments coverage: subsample bits accumulate across segments
    // so joints and overlaps blend exactly once. 256 samples per pixel.
    using Mask = std::array<std::uint64_t, 4>;
    constexpr Mask full_mask{~0ull, ~0ull, ~0ull, ~0ull};
    static thread_local std::vector<Mask> mask;
    mask.assign(std::size_t(W) * H, Mask{0, 0, 0, 0});
    std::vector<std::int32_t> touched;

    for (std::size_t s = 0; s + 1 < points.size(); ++s) {
        const auto& a = points[s];
        const auto& b = points[s + 1];
        if (!std::isfinite(a[0]) || !std::isfinite(a[1]) || !std::isfinite(b[0]) ||
            !std::isfinite(b[1]))
            continue;
        const int bx0 = std::max(cx0, int(std::floor(std::min(a[0], b[0]) - r - 1.0)));
        const int bx1 = std::min(cx1, int(std::ceil(std::max(a[0], b[0]) + r + 1.0)));
        const int by0 = std::max(cy0, int(std::floor(std::min(a[1], b[1]) - r - 1.0)));
        const int by1 = std::min(cy1, int(std::ceil(std::max(a[1], b[1]) + r + 1.0)));
        for (int y = by0; y <= by1; ++y) {
            for (int x = bx0; x <= bx1; ++x) {
                Mask& m = mask[std::size_t(y) * W + x];
                if (m == full_mask) continue;
                // Pixel centers sit at integer coordinates; classifying by
                // the center distance skips missed pixels and floods fully
                // covered ones without sampling.
                const double cd2 = dist2_point_segment(x, y, a[0], a[1], b[0], b[1]);
                const double miss = r + sub_reach, flood = r - sub_reach;
                if (cd2 > miss * miss) continue;
                const bool was_empty = m == Mask{0, 0, 0, 0};
                if (flood > 0.0 && cd2 <= flood * flood) {
                    m = full_mask;
                } else {
                    for (int k = 0; k < 256; ++k) {
                        if (m[k >> 6] & (std::uint64_t(1) << (k & 63))) continue;
                        const double sx = x - 0.5 + (k % 16 + 0.5) / 16.0;
                        const double sy = y - 0.5 + (k / 16 + 0.5) / 16.0;
                        if (dist2_point_segment(sx, sy, a[0], a[1], b[0], b[1]) <= r2)
                            m[k >> 6] |= std::uint64_t(1) << (k & 63);
                    }
                }
                if (was_empty && m != Mask{0, 0, 0, 0})
                    touched.push_back(std::int32_t(std::size_t(y) * W + x));
            }
        }
    }
    for (std::int32_t idx : touched) {
        const Mask& m = mask[std::size_t(idx)];
        const int bits = std::popcount(m[0]) + std::popcount(m[1]) + std::popcount(m[2]) +
                         std::popcount(m[3]);
        blend_pixel(img, idx % W, idx / W, color, double(bits) / 256.0);
    }
}

void draw_polyline(PlotImage& img, const std::vector<std::array<double, 2>>& points,
                   const Rgb& color, double width_px) {
    draw_polyline(img, points, color, width_px,
                  ClipRect{0, img.spec.width_px - 1, 0, img.spec.height_px - 1});
}

void draw_label(PlotImage& img, const std::string& text, int x, int y, const Rgb& color) {
    for (char c : text)
        if (!font::has_glyph(c))
            throw std::invalid_argument(std::string("no glyph for character '") + c + "'");
    int cx = x;
    for (char c : text) {
        for (int gy = 0; gy < font::glyph_height; ++gy)
            for (int gx = 0; gx < font::glyph_width; ++gx)
                if (font::glyph_pixel(c, gx, gy)) set_pixel(img, cx + gx, y + gy, color);
        cx += font::glyph_width + font::spacing;
    }
}

namespace {

constexpr Rgb ink_black{0, 0, 0};
constexpr int tick_len = 4;     // tick mark length in pixels
constexpr int label_gap = 3;    // gap between tick mark and label cell
constexpr int tick_target = 6;  // aimed-for tick count per axis

struct Ranged {
    PlotLimits limits; // t already log10-transformed in log mode
    std::vector<double> t_ticks; // tick positions in *data* space
    std::vector<double> y_ticks;
};

double t_coord(const TimeSeries& s, std::size_t i, const PlotSpec& spec) {
    const double t = s.timestamps.empty() ? double(i) : s.timestamps[i];
    if (spec.x_scale == XScale::log10) {
        if (!(t > 0.0))
            throw std::invalid_argument("log-scale x requires positive time coordinates");
        return std::log10(t);
    }
    return t;
}

Ranged auto_range(const std::vector<TimeSeries>& series, const PlotSpec& spec) {
    double t_lo = std::numeric_limits<double>::infinity(), t_hi = -t_lo;
    double y_lo = t_lo, y_hi = -t_lo;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            const double t = t_coord(s, i, spec);
            t_lo = std::min(t_lo, t);
            t_hi = std::max(t_hi, t);
            const double y = s.values[i];
            if (std::isfinite(y)) {
                y_lo = std::min(y_lo, y);
                y_hi = std::max(y_hi, y);
            }
        }
    }
    widen_degenerate(t_lo, t_hi);
    widen_degenerate(y_lo, y_hi);
    const double tm = spec.data_margin * (t_hi - t_lo);
    const double ym = spec.data_margin * (y_hi - y_lo);

    Ranged r;
    r.limits = PlotLimits{t_lo - tm, t_hi + tm, y_lo - ym, y_hi + ym};

    // Ticks cover the limits, but only in-range ones are drawn.
    std::vector<double> t_all;
    if (spec.x_scale == XScale::log10) {
        t_all = nice_ticks_log10(std::pow(10.0, r.limits.t_lo), std::pow(10.0, r.limits.t_hi));
    } else {
        t_all = nice_ticks(r.limits.t_lo, r.limits.t_hi, tick_target);
    }
    for (double t : t_all) {
        const double tt = spec.x_scale == XScale::log10 ? std::log10(t) : t;
        if (tt >= r.limits.t_lo && tt <= r.limits.t_hi) r.t_ticks.push_back(t);
    }
    for (double y : nice_ticks(r.limits.y_lo, r.limits.y_hi, tick_target))
        if (y >= r.limits.y_lo && y <= r.limits.y_hi) r.y_ticks.push_back(y);
    return r;
}

void draw_frame_and_ticks(PlotImage& img, const Ranged& rng, const PlotSpec& spec) {
    const AxesBoxPx box = axes_box_px(spec);
    for (int x = box.x0; x <= box.x1; ++x) {
        set_pixel(img, x, box.y0, ink_black);
        set_pixel(img, x, box.y1, ink_black);
    }
    for (int y = box.y0; y <= box.y1; ++y) {
        set_pixel(img, box.x0, y, ink_black);
        set_pixel(img, box.x1, y, ink_black);
    }

    for (double t : rng.t_ticks) {
        const auto px = data_to_pixel(t, rng.limits.y_lo, rng.limits, spec);
        const int x = int(std::lround(px[0]));
        for (int dy = 1; dy <= tick_len; ++dy) set_pixel(img, x, box.y1 + dy, ink_black);
        const std::string label = format_tick_label(t);
        const int w = font::text_width(label);
        draw_label(img, label, x - w / 2, box.y1 + tick_len + label_gap, ink_black);
    }
    for (double y : rng.y_ticks) {
        const double v = (y - rng.limits.y_lo) / (rng.limits.y_hi - rng.limits.y_lo);
        const int ypix = int(std::lround(box.y1 - v * (box.y1 - box.y0)));
        for (int dx = 1; dx <= tick_len; ++dx) set_pixel(img, box.x0 - dx, ypix, ink_black);
        const std::string label = format_tick_label(y);
        const int w = font::text_width(label);
        // Ink occupies rows 1..7 of the cell; center those on the tick.
        draw_label(img, label, box.x0 - tick_len - label_gap - w, ypix - 4, ink_black);
    }
}

} // namespace

PlotImage render_plot(const std::vector<TimeSeries>& series, const PlotSpec& spec) {
    spec.validate();
    if (series.empty()) throw std::invalid_argument("nothing to plot: series list is empty");
    for (const auto& s : series) s.validate_for_plot();

    PlotImage img;
    img.spec = spec;
    img.pixels.resize(std::size_t(spec.width_px) * spec.height_px * 3);
    for (int y = 0; y < spec.height_px; ++y)
        for (int x = 0; x < spec.width_px; ++x)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = float(spec.background[c]) / 255.0f;

    const Ranged rng = auto_range(series, spec);
    draw_frame_and_ticks(img, rng, spec);

    const AxesBoxPx box = axes_box_px(spec);
    const ClipRect clip{box.x0, box.x1, box.y0, box.y1};
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const Rgb color = spec.palette[si % spec.palette.size()];
        std::vector<std::array<double, 2>> run;
        auto flush = [&]() {
            if (run.size() >= 2) draw_polyline(img, run, color, spec.line_width_px, clip);
            run.clear();
        };
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            if (!std::isfinite(s.values[i])) {
                flush(); // NaN breaks the curve
                continue;
            }
            const double t_raw = s.timestamps.empty() ? double(i) : s.timestamps[i];
            run.push_back(data_to_pixel(t_raw, s.values[i], rng.limits, spec));
        }
        flush();
    }
    return img;
}

} // namespace ts2img
