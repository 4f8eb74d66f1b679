#include "ts2img/png_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ts2img {

Image8::Image8(int w, int h, int c) : width(w), height(h), channels(c) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
        throw std::invalid_argument("image must be positive-sized with 1 or 3 channels");
    pixels.assign(std::size_t(w) * std::size_t(h) * std::size_t(c), 0);
}

std::uint8_t& Image8::at(int y, int x, int c) {
    return pixels[(std::size_t(y) * width + x) * channels + c];
}
std::uint8_t Image8::at(int y, int x, int c) const {
    return pixels[(std::size_t(y) * width + x) * channels + c];
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t len, std::uint32_t seed) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t n = 0; n < 256; ++n) {
            std::uint32_t c = n;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[n] = c;
        }
        return t;
    }();
    std::uint32_t c = seed ^ 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

std::uint32_t adler32(const std::uint8_t* data, std::size_t len) {
    constexpr std::uint32_t MOD = 65521;
    std::uint32_t a = 1, b = 0;
    for (std::size_t i = 0; i < len; ++i) {
        a = (a + data[i]) % MOD;
        b = (b + a) % MOD;
    }
    return (b << 16) | a;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[5],
               const std::vector<std::uint8_t>& data) {
    put_u32(out, std::uint32_t(data.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    put_u32(out, crc32(out.data() + crc_start, out.size() - crc_start));
}

// zlib wrapper around stored deflate blocks: no compression, but valid for
// any decoder and byte-for-byte reproducible.
std::vector<std::uint8_t> zlib_store(const std::vector<std::uint8_t>& raw) {
    std::vector<std::uint8_t> z;
    z.reserve(raw.size() + raw.size() / 65535 * 5 + 16);
    z.push_back(0x78); // 32K window, deflate
    z.push_back(0x01); // no dictionary, fastest-compression flag; 0x7801 % 31 == 0
    std::size_t off = 0;
    do {
        const std::size_t n = std::min<std::size_t>(65535, raw.size() - off);
        const bool final = off + n == raw.size();
        z.push_back(final ? 1 : 0); // BFINAL, BTYPE=00 (stored)
        z.push_back(std::uint8_t(n & 0xFF));
        z.push_back(std::uint8_t(n >> 8));
        z.push_back(std::uint8_t(~n & 0xFF));
        z.push_back(std::uint8_t((~n >> 8) & 0xFF));
        z.insert(z.end(), raw.begin() + off, raw.begin() + off + n);
        off += n;
    } while (off < raw.size());
    put_u32(z, adler32(raw.data(), raw.size()));
    return z;
}

std::vector<std::uint8_t> zlib_unstore(const std::vector<std::uint8_t>& z) {
    if (z.size() < 6) throw std::runtime_error("png: zlib stream truncated");
    if ((z[0] & 0x0F) != 8) throw std::runtime_error("png: not a deflate stream");
    if (((std::uint32_t(z[0]) << 8) | z[1]) % 31 != 0)
        throw std::runtime_error("png: bad zlib header check");
    std::vector<std::uint8_t> raw;
    std::size_t off = 2;
    for (;;) {
        if (off + 5 > z.size() - 4) throw std::runtime_error("png: zlib stream truncated");
        const std::uint8_t header = z[off];
        if ((header >> 1) != 0)
            throw std::runtime_error("png: only stored deflate blocks are supported");
        const std::size_t n = std::size_t(z[off + 1]) | (std::size_t(z[off + 2]) << 8);
        const std::size_t nlen = std::size_t(z[off + 3]) | (std::size_t(z[off + 4]) << 8);
        if ((n ^ nlen) != 0xFFFF) throw std::runtime_error("png: stored block length corrupt");
        off += 5;
        if (off + n > z.size() - 4) throw std::runtime_error("png: zlib stream truncated");
        raw.insert(raw.end(), z.begin() + off, z.begin() + off + n);
        off += n;
        if (header & 1) break;
    }
    if (get_u32(z.data() + z.size() - 4) != adler32(raw.data(), raw.size()))
        throw std::runtime_error("png: adler32 mismatch");
    return raw;
}

} // namespace

std::vector<std::uint8_t> encode_png(const Image8& img) {
    if (img.width <= 0 || img.height <= 0 || (img.channels != 1 && img.channels != 3))
        throw std::invalid_argument("png: image must be 8-bit gray or RGB");
    const std::size_t expect = std::size_t(img.width) * img.height * img.channels;
    if (img.pixels.size() != expect)
        throw std::invalid_argument("png: pixel buffer length does not match dimensions");

    std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, std::uint32_t(img.width));
    put_u32(ihdr, std::uint32_t(img.height));
    ihdr.push_back(8);                               // bit depth
    ihdr.push_back(img.channels == 3 ? 2 : 0);       // color type
    ihdr.push_back(0);                               // compression
    ihdr.push_back(0);                               // filter
    ihdr.push_back(0);                               // interlace
    put_chunk(out, "IHDR", ihdr);

    // Filter byte 0 (None) before every scanline.
    const std::size_t stride = std::size_t(img.width) * img.channels;
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), img.pixels.begin() + y * stride, img.pixels.begin() + (y + 1) * stride);
    }
    put_chunk(out, "IDAT", zlib_store(raw));
    put_chunk(out, "IEND", {});
    return out;
}

Image8 decode_png(const std::vector<std::uint8_t>& bytes) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
        throw std::runtime_error("png: bad signature");

    Image8 img;
    std::vector<std::uint8_t> idat;
    bool have_ihdr = false;
    std::size_t off = 8;
    while (off + 12 <= bytes.size()) {
        const std::uint32_t len = get_u32(bytes.data() + off);
        if (off + 12 + len > bytes.size()) throw std::runtime_error("png: chunk overruns file");
        const char* type = reinterpret_cast<const char*>(bytes.data() + off + 4);
        const std::uint8_t* data = bytes.data() + off + 8;
        if (crc32(bytes.data() + off + 4, len + 4) != get_u32(data + len))
            throw std::runtime_error("png: chunk crc mismatch");

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw std::runtime_error("png: bad IHDR length");
            img.width = int(get_u32(data));
            img.height = int(get_u32(data + 4));
            const int depth = data[8], color = data[9], interlace = data[12];
            if (depth != 8 || (color != 2 && color != 0) || interlace != 0)
                throw std::runtime_error("png: unsupported format (need 8-bit gray/RGB, no interlace)");
            img.channels = color == 2 ? 3 : 1;
            have_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        off += 12 + len;
    }
    if (!have_ihdr) throw std::runtime_error("png: missing IHDR");

    const auto raw = zlib_unstore(idat);
    const std::size_t stride = std::size_t(img.width) * img.channels;
    if (raw.size() != (stride + 1) * std::size_t(img.height))
        throw std::runtime_error("png: decoded size mismatch");
    img.pixels.resize(stride * img.height);
    for (int y = 0; y < img.height; ++y) {
        if (raw[y * (stride + 1)] != 0)
            throw std::runtime_error("png: only filter type 0 is supported");
        std::memcpy(img.pixels.data() + y * stride, raw.data() + y * (stride + 1) + 1, stride);
    }
    return img;
}

void write_png(const std::string& path, const Image8& img) {
    const auto bytes = encode_png(img);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

Image8 read_png(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

} // namespace ts2img
