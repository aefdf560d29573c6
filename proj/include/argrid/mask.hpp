#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "argrid/error.hpp"
#include "argrid/tensor.hpp"

namespace argrid {

/// Kernel mask patterns. CausalA hides the center tap and everything after it
/// in raster order, CausalB hides only what follows the center, BidirA hides
/// only the center and Full hides nothing.
enum class MaskKind { CausalA, CausalB, BidirA, Full };

constexpr std::string_view mask_name(MaskKind kind) noexcept {
    switch (kind) {
        case MaskKind::CausalA: return "causal_a";
        case MaskKind::CausalB: return "causal_b";
        case MaskKind::BidirA: return "bidir_a";
        case MaskKind::Full: return "full";
    }
    return "full";
}

inline MaskKind parse_mask_kind(std::string_view name) {
    if (name == "causal_a") return MaskKind::CausalA;
    if (name == "causal_b") return MaskKind::CausalB;
    if (name == "bidir_a") return MaskKind::BidirA;
    if (name == "full") return MaskKind::Full;
    throw Error(ErrorCode::InvalidConfig, "unknown mask kind '" + std::string(name) + "'");
}

constexpr bool is_causal(MaskKind kind) noexcept {
    return kind == MaskKind::CausalA || kind == MaskKind::CausalB;
}

/// Strict raster-scan order on grid positions.
constexpr bool raster_precedes(Index i, Index j, Index i2, Index j2) noexcept {
    return i < i2 || (i == i2 && j < j2);
}

struct KernelMask {
    MaskKind kind = MaskKind::Full;
    Index k = 1;
    std::vector<std::uint8_t> m;  // row-major K*K, 1 = tap kept

    bool operator()(Index u, Index v) const { return m[static_cast<std::size_t>(u * k + v)] != 0; }
    Index ones() const {
        Index count = 0;
        for (auto bit : m) count += bit;
        return count;
    }
    friend bool operator==(const KernelMask&, const KernelMask&) = default;
};

inline KernelMask build_mask(MaskKind kind, Index k) {
    require(k >= 1 && k % 2 == 1, ErrorCode::InvalidArgument,
            "mask size must be odd and positive, got " + std::to_string(k));
    const Index r = (k - 1) / 2;
    KernelMask mask{kind, k, std::vector<std::uint8_t>(static_cast<std::size_t>(k * k), 0)};
    for (Index u = 0; u < k; ++u)
        for (Index v = 0; v < k; ++v) {
            bool keep = true;
            switch (kind) {
                case MaskKind::CausalA: keep = u < r || (u == r && v < r); break;
                case MaskKind::CausalB: keep = u < r || (u == r && v <= r); break;
                case MaskKind::BidirA: keep = !(u == r && v == r); break;
                case MaskKind::Full: keep = true; break;
            }
            mask.m[static_cast<std::size_t>(u * k + v)] = keep ? 1 : 0;
        }
    return mask;
}

/// Zeroes every entry of a (C_out, C_in, K, K) array at positions the mask hides.
template <typename Scalar>
void mask_in_place(std::type_identity_t<Eigen::Ref<VectorX<Scalar>>> values, const ConvWeights<Scalar>& layout, const KernelMask& mask) {
    const Index taps = layout.taps();
    for (Index slice = 0; slice < layout.c_out * layout.c_in; ++slice)
        for (Index t = 0; t < taps; ++t)
            if (mask.m[static_cast<std::size_t>(t)] == 0) values[slice * taps + t] = 0;
}

template <typename Scalar>
ConvWeights<Scalar> apply_mask(ConvWeights<Scalar> wts, const KernelMask& mask) {
    require(mask.k == wts.k, ErrorCode::DimensionMismatch,
            "mask size " + std::to_string(mask.k) + " differs from kernel size " + std::to_string(wts.k));
    mask_in_place(wts.w, wts, mask);
    return wts;
}

/// First flat weight index holding a nonzero value at a hidden tap, or -1.
template <typename Scalar>
Index find_mask_violation(const ConvWeights<Scalar>& wts, const KernelMask& mask) {
    const Index taps = wts.taps();
    for (Index slice = 0; slice < wts.c_out * wts.c_in; ++slice)
        for (Index t = 0; t < taps; ++t)
            if (mask.m[static_cast<std::size_t>(t)] == 0 && wts.w[slice * taps + t] != Scalar(0))
                return slice * taps + t;
    return -1;
}

} // namespace argrid
