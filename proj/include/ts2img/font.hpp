#ifndef TS2IMG_FONT_HPP
#define TS2IMG_FONT_HPP

#include <string>

namespace ts2img::font {

// Embedded 5x7-ink bitmap glyphs in 6x10 cells, covering exactly the
// characters tick labels can contain. Everything is compiled in so rendered
// text is identical on every machine.
inline constexpr int glyph_width = 6;
inline constexpr int glyph_height = 10;
inline constexpr int spacing = 1;

bool has_glyph(char c);

// Ink test for cell-local coordinates x in [0,6), y in [0,10).
// Throws on characters outside the glyph set.
bool glyph_pixel(char c, int x, int y);

// n*glyph_width + (n-1)*spacing for n > 0; 0 for empty text.
int text_width(const std::string& text);

} // namespace ts2img::font

#endif
