#ifndef TS2IMG_PNG_IO_HPP
#define TS2IMG_PNG_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ts2img {

// 8-bit raster, rows top to bottom, channels interleaved.
// channels == 3 (RGB) or 1 (grayscale).
struct Image8 {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<std::uint8_t> pixels;

    Image8() = default;
    Image8(int w, int h, int c);

    std::uint8_t& at(int y, int x, int c);
    std::uint8_t at(int y, int x, int c) const;
};

std::uint32_t crc32(const std::uint8_t* data, std::size_t len, std::uint32_t seed = 0);
std::uint32_t adler32(const std::uint8_t* data, std::size_t len);

// Self-contained PNG codec for this project's own files: 8-bit RGB or
// grayscale, zlib streams made of stored (uncompressed) deflate blocks.
// Output is byte-for-byte deterministic.
std::vector<std::uint8_t> encode_png(const Image8& img);
Image8 decode_png(const std::vector<std::uint8_t>& bytes);

void write_png(const std::string& path, const Image8& img);
Image8 read_png(const std::string& path);

} // namespace ts2img

#endif
