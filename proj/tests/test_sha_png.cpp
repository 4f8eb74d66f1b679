#include "ts2img/png_io.hpp"
#include "ts2img/rng.hpp"
#include "ts2img/sha256.hpp"

#include <doctest.h>

#include <cstring>
#include <stdexcept>
#include <string>

using namespace ts2img;

TEST_CASE("sha256 matches the published test vectors") {
    CHECK(Sha256::hex_of("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(Sha256::hex_of("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(Sha256::hex_of("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");

    std::string a_million(1000000, 'a');
    CHECK(Sha256::hex_of(a_million) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("sha256 streaming equals one-shot across split points") {
    std::string msg;
    for (int i = 0; i < 300; ++i) msg += char('a' + i % 26);
    const auto whole = Sha256::hex_of(msg);
    for (std::size_t split : {std::size_t(1), std::size_t(63), std::size_t(64), std::size_t(65),
                              std::size_t(128), std::size_t(299)}) {
        Sha256 s;
        s.update(msg.data(), split);
        s.update(msg.data() + split, msg.size() - split);
        CHECK(Sha256::hex(s.finish()) == whole);
    }
}

TEST_CASE("crc32 and adler32 match known vectors") {
    const char* nine = "123456789";
    CHECK(crc32(reinterpret_cast<const std::uint8_t*>(nine), 9) == 0xCBF43926u);
    CHECK(crc32(nullptr, 0) == 0u);

    const char* wiki = "Wikipedia";
    CHECK(adler32(reinterpret_cast<const std::uint8_t*>(wiki), 9) == 0x11E60398u);
    CHECK(adler32(nullptr, 0) == 1u);
}

TEST_CASE("png round-trips rgb and grayscale images") {
    CounterRng rng(31);
    for (int channels : {3, 1}) {
        Image8 img(37, 23, channels);
        for (auto& p : img.pixels) p = std::uint8_t(rng.next_below(256));
        const auto bytes = encode_png(img);
        const Image8 back = decode_png(bytes);
        CHECK(back.width == img.width);
        CHECK(back.height == img.height);
        CHECK(back.channels == img.channels);
        CHECK(back.pixels == img.pixels);

        // Same pixels encode to the same bytes.
        CHECK(encode_png(img) == bytes);
    }
}

TEST_CASE("png round-trips an image larger than one stored block") {
    CounterRng rng(32);
    Image8 img(432, 288, 3); // raw stream ~373k, forcing several 64k blocks
    for (auto& p : img.pixels) p = std::uint8_t(rng.next_below(256));
    CHECK(decode_png(encode_png(img)).pixels == img.pixels);
}

TEST_CASE("png writer emits the standard layout") {
    Image8 img(2, 1, 3);
    img.pixels = {255, 0, 0, 0, 0, 255};
    const auto bytes = encode_png(img);
    const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    REQUIRE(bytes.size() > 8);
    CHECK(std::memcmp(bytes.data(), sig, 8) == 0);
    CHECK(std::memcmp(bytes.data() + 12, "IHDR", 4) == 0);
    // width 2, height 1, depth 8, truecolor
    CHECK(bytes[19] == 2);
    CHECK(bytes[23] == 1);
    CHECK(bytes[24] == 8);
    CHECK(bytes[25] == 2);
}

TEST_CASE("png decoder rejects corrupt input") {
    Image8 img(4, 4, 3);
    auto bytes = encode_png(img);
    CHECK_NOTHROW(decode_png(bytes));

    auto bad_sig = bytes;
    bad_sig[0] = 0;
    CHECK_THROWS_AS(decode_png(bad_sig), std::runtime_error);

    auto bad_crc = bytes;
    bad_crc[20] ^= 0xFF; // inside IHDR data
    CHECK_THROWS_AS(decode_png(bad_crc), std::runtime_error);

    auto truncated = bytes;
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_AS(decode_png(truncated), std::runtime_error);
}

TEST_CASE("file write and read round-trip") {
    Image8 img(9, 5, 3);
    CounterRng rng(33);
    for (auto& p : img.pixels) p = std::uint8_t(rng.next_below(256));
    const std::string path = "roundtrip_test.png";
    write_png(path, img);
    CHECK(read_png(path).pixels == img.pixels);
    std::remove(path.c_str());
}
