#ifndef TS2IMG_SHA256_HPP
#define TS2IMG_SHA256_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ts2img {

// Incremental SHA-256 (FIPS 180-4), used for render goldens and cache keys.
class Sha256 {
  public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    std::array<std::uint8_t, 32> finish();

    static std::array<std::uint8_t, 32> hash(const void* data, std::size_t len);
    static std::string hex(const std::array<std::uint8_t, 32>& digest);
    static std::string hex_of(std::string_view text);
    static std::string hex_of(const std::vector<std::uint8_t>& bytes);

  private:
    void process_block(const std::uint8_t* block);

    std::uint32_t h_[8];
    std::uint8_t buf_[64];
    std::size_t buf_len_ = 0;
    std::uint64_t total_ = 0;
};

} // namespace ts2img

#endif
