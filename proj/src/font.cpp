#include "ts2img/font.hpp"

#include <stdexcept>

namespace ts2img::font {

namespace {

// 5x7 ink per glyph, one string per row; '#' marks an inked pixel.
// Within the 6x10 cell the ink sits at x 0..4, y 1..7 (one blank row above,
// two below, one blank column right as side bearing).
struct Glyph {
    char c;
    const char* rows[7];
};

constexpr Glyph glyphs[] = {
    {'0', {" ### ",
           "#   #",
           "#  ##",
           "# # #",
           "##  #",
           "#   #",
           " ### "}},
    {'1', {"  #  ",
           " ##  ",
           "  #  ",
           "  #  ",
           "  #  ",
           "  #  ",
           " ### "}},
    {'2', {" ### ",
           "#   #",
           "    #",
           "   # ",
           "  #  ",
           " #   ",
           "#####"}},
    {'3', {"#####",
           "   # ",
           "  #  ",
           "   # ",
           "    #",
           "#   #",
           " ### "}},
    {'4', {"   # ",
           "  ## ",
           " # # ",
           "#  # ",
           "#####",
           "   # ",
           "   # "}},
    {'5', {"#####",
           "#    ",
           "#### ",
           "    #",
           "    #",
           "#   #",
           " ### "}},
    {'6', {"  ## ",
           " #   ",
           "#    ",
           "#### ",
           "#   #",
           "#   #",
           " ### "}},
    {'7', {"#####",
           "    #",
           "   # ",
           "  #  ",
           " #   ",
           " #   ",
           " #   "}},
    {'8', {" ### ",
           "#   #",
           "#   #",
           " ### ",
           "#   #",
           "#   #",
           " ### "}},
    {'9', {" ### ",
           "#   #",
           "#   #",
           " ####",
           "    #",
           "   # ",
           " ##  "}},
    {'.', {"     ",
           "     ",
           "     ",
           "     ",
           "     ",
           " ##  ",
           " ##  "}},
    {'-', {"     ",
           "     ",
           "     ",
           "#####",
           "     ",
           "     ",
           "     "}},
    {'e', {"     ",
           "     ",
           " ### ",
           "#   #",
           "#####",
           "#    ",
           " ### "}},
    {'+', {"     ",
           "  #  ",
           "  #  ",
           "#####",
           "  #  ",
           "  #  ",
           "     "}},
};

const Glyph* find(char c) {
    for (const auto& g : glyphs)
        if (g.c == c) return &g;
    return nullptr;
}

} // namespace

bool has_glyph(char c) { return find(c) != nullptr; }

bool glyph_pixel(char c, int x, int y) {
    const Glyph* g = find(c);
    if (!g) throw std::invalid_argument(std::string("no glyph for character '") + c + "'");
    if (x < 0 || x >= glyph_width || y < 0 || y >= glyph_height)
        throw std::out_of_range("glyph coordinate outside cell");
    if (x > 4 || y < 1 || y > 7) return false;
    return g->rows[y - 1][x] == '#';
}

int text_width(const std::string& text) {
    if (text.empty()) return 0;
    const int n = static_cast<int>(text.size());
    return n * glyph_width + (n - 1) * spacing;
}

} // namespace ts2img::font
