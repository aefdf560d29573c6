#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "argrid/nll.hpp"
#include "argrid/tensor.hpp"

namespace argrid {

using Bytes = std::vector<std::uint8_t>;

/// Binary ground-truth masks, (N, H, W) row-major, values in {0, 1}.
struct LabelMasks {
    Index n = 0;
    Index h = 0;
    Index w = 0;
    std::vector<std::uint8_t> labels;

    std::uint8_t operator()(Index img, Index i, Index j) const {
        return labels[static_cast<std::size_t>((img * h + i) * w + j)];
    }
};

// FGRD: "FGRD", u32 version 1, u32 N, H, W, D, then f32 in (n, h, w, d) order.
Bytes encode_fgrd(const Grid4<float>& grid);
Grid4<float> decode_fgrd(std::span<const std::uint8_t> bytes);

// AMSK: "AMSK", u32 version 1, u32 N, H, W, then u8 in {0, 1}.
Bytes encode_amsk(const LabelMasks& masks);
LabelMasks decode_amsk(std::span<const std::uint8_t> bytes);

// AMAP: "AMAP", u32 version 1, u32 N, H, W, then f32 scores.
Bytes encode_amap(const AnomalyMap<float>& map);
AnomalyMap<float> decode_amap(std::span<const std::uint8_t> bytes);

/// Binary PGM (P5, maxval 255) of one score plane, min-max normalized.
Bytes encode_pgm(const Eigen::Ref<const PlaneX<float>>& plane);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

Grid4<float> read_fgrd(const std::filesystem::path& path);
LabelMasks read_amsk(const std::filesystem::path& path);
AnomalyMap<float> read_amap(const std::filesystem::path& path);

namespace detail {

void put_u32(Bytes& out, std::uint32_t value);
void put_f32(Bytes& out, float value);

/// Little-endian cursor that reports the byte offset of any violation.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

    void expect_magic(std::string_view magic);
    std::uint32_t u32();
    float f32();
    std::uint8_t u8();
    std::span<const std::uint8_t> take(std::size_t count);
    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    void expect_end() const;
    [[noreturn]] void fail(ErrorCode code, const std::string& message, std::size_t at) const;

private:
    void need(std::size_t count) const;

    std::span<const std::uint8_t> bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

} // namespace detail
} // namespace argrid
