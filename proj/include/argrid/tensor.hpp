#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "argrid/error.hpp"

namespace argrid {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using PlaneX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape4 {
    Index n = 0;
    Index c = 0;
    Index h = 0;
    Index w = 0;

    Index size() const noexcept { return n * c * h * w; }
    friend bool operator==(const Shape4&, const Shape4&) = default;
};

inline std::string to_string(const Shape4& s) {
    return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
           std::to_string(s.w) + ")";
}

/// Dense batch of feature planes in (N, C, H, W) row-major order.
template <typename Scalar>
struct Grid4 {
    Shape4 shape;
    VectorX<Scalar> data;

    Grid4() = default;
    explicit Grid4(const Shape4& s) : shape(s), data(VectorX<Scalar>::Zero(s.size())) {}
    Grid4(Index n, Index c, Index h, Index w) : Grid4(Shape4{n, c, h, w}) {}

    Index batch() const noexcept { return shape.n; }
    Index channels() const noexcept { return shape.c; }
    Index rows() const noexcept { return shape.h; }
    Index cols() const noexcept { return shape.w; }
    Index plane_size() const noexcept { return shape.h * shape.w; }

    Index offset(Index n, Index c, Index i, Index j) const noexcept {
        return ((n * shape.c + c) * shape.h + i) * shape.w + j;
    }
    Scalar& operator()(Index n, Index c, Index i, Index j) { return data[offset(n, c, i, j)]; }
    Scalar operator()(Index n, Index c, Index i, Index j) const { return data[offset(n, c, i, j)]; }

    Scalar* plane_data(Index n, Index c) { return data.data() + offset(n, c, 0, 0); }
    const Scalar* plane_data(Index n, Index c) const { return data.data() + offset(n, c, 0, 0); }

    Eigen::Map<PlaneX<Scalar>> plane(Index n, Index c) {
        return Eigen::Map<PlaneX<Scalar>>(plane_data(n, c), shape.h, shape.w);
    }
    Eigen::Map<const PlaneX<Scalar>> plane(Index n, Index c) const {
        return Eigen::Map<const PlaneX<Scalar>>(plane_data(n, c), shape.h, shape.w);
    }

    /// One image of the batch as a contiguous (C*H*W) block.
    auto image(Index n) { return data.segment(n * shape.c * plane_size(), shape.c * plane_size()); }
    auto image(Index n) const { return data.segment(n * shape.c * plane_size(), shape.c * plane_size()); }

    Grid4 slice(Index first, Index count) const {
        Grid4 out(Shape4{count, shape.c, shape.h, shape.w});
        const Index stride = shape.c * plane_size();
        out.data = data.segment(first * stride, count * stride);
        return out;
    }

    template <typename Other>
    Grid4<Other> cast() const {
        Grid4<Other> out;
        out.shape = shape;
        out.data = data.template cast<Other>();
        return out;
    }

    bool all_finite() const { return data.allFinite(); }
};

/// Convolution parameters. Weights are (C_out, C_in, K, K) row-major.
template <typename Scalar>
struct ConvWeights {
    Index c_out = 0;
    Index c_in = 0;
    Index k = 1;
    Index dilation = 1;
    VectorX<Scalar> w;
    VectorX<Scalar> b;

    ConvWeights() = default;
    ConvWeights(Index out, Index in, Index kernel, Index dil)
        : c_out(out), c_in(in), k(kernel), dilation(dil),
          w(VectorX<Scalar>::Zero(out * in * kernel * kernel)), b(VectorX<Scalar>::Zero(out)) {}

    Index taps() const noexcept { return k * k; }
    Index radius() const noexcept { return (k - 1) / 2; }
    Index weight_offset(Index o, Index c, Index u, Index v) const noexcept {
        return ((o * c_in + c) * k + u) * k + v;
    }
    Scalar& operator()(Index o, Index c, Index u, Index v) { return w[weight_offset(o, c, u, v)]; }
    Scalar operator()(Index o, Index c, Index u, Index v) const { return w[weight_offset(o, c, u, v)]; }

    Index parameter_count() const noexcept { return w.size() + b.size(); }

    void validate() const {
        require(k >= 1 && k % 2 == 1, ErrorCode::InvalidArgument,
                "kernel size must be odd and positive, got " + std::to_string(k));
        require(dilation >= 1, ErrorCode::InvalidArgument,
                "dilation must be >= 1, got " + std::to_string(dilation));
        require(c_out >= 1 && c_in >= 1, ErrorCode::InvalidArgument, "channel counts must be positive");
        require(w.size() == c_out * c_in * k * k && b.size() == c_out, ErrorCode::DimensionMismatch,
                "weight storage does not match (C_out, C_in, K, K)");
    }

    template <typename Other>
    ConvWeights<Other> cast() const {
        ConvWeights<Other> out(c_out, c_in, k, dilation);
        out.w = w.template cast<Other>();
        out.b = b.template cast<Other>();
        return out;
    }
};

template <typename Scalar>
struct ConvGradients {
    Grid4<Scalar> grad_x;
    VectorX<Scalar> grad_w;
    VectorX<Scalar> grad_b;
};

struct BackwardOptions {
    bool input_gradient = true;
    /// K*K flags; taps flagged 0 are structurally absent and get a zero weight gradient.
    std::span<const std::uint8_t> tap_filter{};
};

namespace detail {

// Valid output range [lo, hi) along one axis for a tap offset.
struct TapRange {
    Index lo;
    Index hi;
};

inline TapRange tap_range(Index extent, Index offset) {
    return {std::max<Index>(0, -offset), std::min<Index>(extent, extent - offset)};
}

template <typename Scalar>
void load_planes(const Grid4<Scalar>& g, Index n, std::vector<double>& buf) {
    const Index count = g.channels() * g.plane_size();
    buf.resize(static_cast<std::size_t>(count));
    const Scalar* src = g.plane_data(n, 0);
    for (Index t = 0; t < count; ++t) buf[static_cast<std::size_t>(t)] = static_cast<double>(src[t]);
}

template <typename Scalar>
void check_conv_input(const Grid4<Scalar>& x, const ConvWeights<Scalar>& wts) {
    wts.validate();
    require(x.data.size() == x.shape.size(), ErrorCode::DimensionMismatch, "grid storage does not match dims");
    require(x.channels() == wts.c_in, ErrorCode::DimensionMismatch,
            "input has " + std::to_string(x.channels()) + " channels, weights expect " +
                std::to_string(wts.c_in));
}

} // namespace detail

namespace detail {

inline constexpr Index kOutBlock = 4;  // output channels per register tile
inline constexpr Index kColBlock = 16;  // output columns per register tile

inline Index round_up(Index value, Index step) { return (value + step - 1) / step * step; }

} // namespace detail

/// Same-size dilated convolution with zero padding d*(K-1)/2.
///
/// Every output element is accumulated in double as b[o], then taps in
/// raster order (u, v), then input channels c, which is the order
/// conv2d_forward_direct uses. Rows outside the grid are skipped; columns
/// outside it read zero padding, which adds a signed zero and leaves the sum
/// numerically unchanged.
template <typename Scalar>
Grid4<Scalar> conv2d_forward(const Grid4<Scalar>& x, const ConvWeights<Scalar>& wts) {
    using detail::kColBlock;
    using detail::kOutBlock;
    detail::check_conv_input(x, wts);
    const Index H = x.rows(), W = x.cols(), K = wts.k, r = wts.radius();
    const Index C = wts.c_in, O = wts.c_out;
    const Index pad = wts.dilation * r;
    const Index W_tiles = detail::round_up(W, kColBlock);
    const Index row_stride = W_tiles + 2 * pad;
    const Index O_tiles = detail::round_up(O, kOutBlock);
    Grid4<Scalar> out(x.batch(), O, H, W);

    // Weights as [tap][c][o] with zero-filled output padding.
    std::vector<double> wt(static_cast<std::size_t>(K * K * C * O_tiles), 0.0);
    for (Index o = 0; o < O; ++o)
        for (Index c = 0; c < C; ++c)
            for (Index t = 0; t < K * K; ++t)
                wt[static_cast<std::size_t>((t * C + c) * O_tiles + o)] =
                    static_cast<double>(wts.w[(o * C + c) * K * K + t]);
    // Taps whose whole weight slice is zero contribute nothing and are skipped.
    std::vector<std::uint8_t> tap_live(static_cast<std::size_t>(K * K * C), 0);
    for (Index tc = 0; tc < K * K * C; ++tc)
        for (Index o = 0; o < O; ++o)
            if (wt[static_cast<std::size_t>(tc * O_tiles + o)] != 0.0) tap_live[static_cast<std::size_t>(tc)] = 1;

    std::vector<double> xpad(static_cast<std::size_t>(C * H * row_stride), 0.0);
    using Tile = Eigen::Array<double, kColBlock, 1>;
    std::array<Tile, kOutBlock> acc;
    for (Index n = 0; n < x.batch(); ++n) {
        for (Index c = 0; c < C; ++c)
            for (Index i = 0; i < H; ++i) {
                const Scalar* src = x.plane_data(n, c) + i * W;
                double* dst = xpad.data() + (c * H + i) * row_stride + pad;
                for (Index j = 0; j < W; ++j) dst[j] = static_cast<double>(src[j]);
            }
        for (Index i = 0; i < H; ++i)
            for (Index ob = 0; ob < O_tiles; ob += kOutBlock)
                for (Index jb = 0; jb < W_tiles; jb += kColBlock) {
                    for (Index q = 0; q < kOutBlock; ++q) {
                        const double bias = ob + q < O ? static_cast<double>(wts.b[ob + q]) : 0.0;
                        acc[q].setConstant(bias);
                    }
                    for (Index u = 0; u < K; ++u) {
                        const Index ii = i + wts.dilation * (u - r);
                        if (ii < 0 || ii >= H) continue;
                        for (Index v = 0; v < K; ++v) {
                            const Index col0 = jb + pad + wts.dilation * (v - r);
                            const Index tc0 = (u * K + v) * C;
                            for (Index c = 0; c < C; ++c) {
                                if (!tap_live[static_cast<std::size_t>(tc0 + c)]) continue;
                                const double* xr = xpad.data() + (c * H + ii) * row_stride + col0;
                                const double* wq = wt.data() + (tc0 + c) * O_tiles + ob;
                                const Tile xv = Eigen::Map<const Tile>(xr);
                                for (Index q = 0; q < kOutBlock; ++q) acc[q] += wq[q] * xv;
                            }
                        }
                    }
                    for (Index q = 0; q < kOutBlock && ob + q < O; ++q) {
                        Scalar* dst = out.plane_data(n, ob + q) + i * W;
                        for (Index e = 0; e < kColBlock && jb + e < W; ++e) dst[jb + e] = static_cast<Scalar>(acc[q][e]);
                    }
                }
    }
    return out;
}

/// Direct per-element evaluation of the convolution sum; the reference the
/// plane-sweeping path above must reproduce exactly.
template <typename Scalar>
Grid4<Scalar> conv2d_forward_direct(const Grid4<Scalar>& x, const ConvWeights<Scalar>& wts) {
    detail::check_conv_input(x, wts);
    const Index H = x.rows(), W = x.cols(), K = wts.k, r = wts.radius();
    Grid4<Scalar> out(x.batch(), wts.c_out, H, W);
    for (Index n = 0; n < x.batch(); ++n)
        for (Index o = 0; o < wts.c_out; ++o)
            for (Index i = 0; i < H; ++i)
                for (Index j = 0; j < W; ++j) {
                    double acc = static_cast<double>(wts.b[o]);
                    for (Index u = 0; u < K; ++u)
                        for (Index v = 0; v < K; ++v) {
                            const Index ii = i + wts.dilation * (u - r);
                            const Index jj = j + wts.dilation * (v - r);
                            if (ii < 0 || ii >= H || jj < 0 || jj >= W) continue;
                            for (Index c = 0; c < wts.c_in; ++c)
                                acc += static_cast<double>(wts(o, c, u, v)) * static_cast<double>(x(n, c, ii, jj));
                        }
                    out(n, o, i, j) = static_cast<Scalar>(acc);
                }
    return out;
}

/// Gradients of sum(conv2d_forward(x, wts) * grad_out) with respect to x, w and b.
///
/// Per image the shifted inputs are gathered into a (K*K*C_in, H*W) matrix so
/// both weight and input gradients reduce to one dense product each.
template <typename Scalar>
ConvGradients<Scalar> conv2d_backward(const Grid4<Scalar>& x, const ConvWeights<Scalar>& wts,
                                      const Grid4<Scalar>& grad_out, const BackwardOptions& options = {}) {
    detail::check_conv_input(x, wts);
    require(grad_out.shape == Shape4{x.batch(), wts.c_out, x.rows(), x.cols()}, ErrorCode::DimensionMismatch,
            "grad_out dims " + to_string(grad_out.shape) + " differ from forward output dims");
    require(options.tap_filter.empty() || static_cast<Index>(options.tap_filter.size()) == wts.taps(),
            ErrorCode::DimensionMismatch, "tap filter size differs from K*K");

    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Index H = x.rows(), W = x.cols(), P = H * W, K = wts.k, r = wts.radius();
    const Index C = wts.c_in, O = wts.c_out;

    // Active taps and their (row, col) offsets.
    std::vector<Index> taps, du, dv;
    for (Index u = 0; u < K; ++u)
        for (Index v = 0; v < K; ++v) {
            if (!options.tap_filter.empty() && options.tap_filter[static_cast<std::size_t>(u * K + v)] == 0) continue;
            taps.push_back(u * K + v);
            du.push_back(wts.dilation * (u - r));
            dv.push_back(wts.dilation * (v - r));
        }
    const Index T = static_cast<Index>(taps.size());

    // Weights of the active taps as (T*C, O): row t*C + c holds w[:, c, tap t].
    RowMat wcol(T * C, O);
    for (Index t = 0; t < T; ++t)
        for (Index c = 0; c < C; ++c)
            for (Index o = 0; o < O; ++o) wcol(t * C + c, o) = static_cast<double>(wts.w[(o * C + c) * K * K + taps[t]]);

    RowMat gw_col = RowMat::Zero(O, T * C);
    VectorX<double> gb = VectorX<double>::Zero(O);
    RowMat xcol(T * C, P), g(O, P), gx_col;
    std::vector<double> xin, gin;

    ConvGradients<Scalar> grads;
    if (options.input_gradient) grads.grad_x = Grid4<Scalar>(x.shape);

    for (Index n = 0; n < x.batch(); ++n) {
        detail::load_planes(grad_out, n, gin);
        g = Eigen::Map<const RowMat>(gin.data(), O, P);
        gb += g.rowwise().sum();

        if (T > 0) {
            detail::load_planes(x, n, xin);
            xcol.setZero();
            for (Index t = 0; t < T; ++t) {
                const auto rows = detail::tap_range(H, du[t]);
                const auto cols = detail::tap_range(W, dv[t]);
                for (Index c = 0; c < C; ++c) {
                    double* dst = xcol.row(t * C + c).data();
                    const double* src = xin.data() + c * P;
                    for (Index i = rows.lo; i < rows.hi; ++i)
                        for (Index j = cols.lo; j < cols.hi; ++j) dst[i * W + j] = src[(i + du[t]) * W + j + dv[t]];
                }
            }
            gw_col.noalias() += g * xcol.transpose();
        }

        if (!options.input_gradient) continue;
        // Masked-out taps carry zero weights by contract, so only active taps feed grad_x.
        RowMat gx = RowMat::Zero(C, P);
        if (T > 0) {
            gx_col.noalias() = wcol * g;
            for (Index t = 0; t < T; ++t) {
                const auto rows = detail::tap_range(H, du[t]);
                const auto cols = detail::tap_range(W, dv[t]);
                for (Index c = 0; c < C; ++c) {
                    double* dst = gx.row(c).data();
                    const double* src = gx_col.row(t * C + c).data();
                    for (Index i = rows.lo; i < rows.hi; ++i)
                        for (Index j = cols.lo; j < cols.hi; ++j) dst[(i + du[t]) * W + j + dv[t]] += src[i * W + j];
                }
            }
        }
        Scalar* out = grads.grad_x.plane_data(n, 0);
        for (Index e = 0; e < C * P; ++e) out[e] = static_cast<Scalar>(gx.data()[e]);
    }

    grads.grad_w = VectorX<Scalar>::Zero(wts.w.size());
    for (Index t = 0; t < T; ++t)
        for (Index c = 0; c < C; ++c)
            for (Index o = 0; o < O; ++o)
                grads.grad_w[(o * C + c) * K * K + taps[t]] = static_cast<Scalar>(gw_col(o, t * C + c));
    grads.grad_b = gb.cast<Scalar>();
    return grads;
}

/// Frobenius inner product of two equally shaped grids, accumulated in double.
template <typename Scalar>
double inner_product(const Grid4<Scalar>& a, const Grid4<Scalar>& b) {
    require(a.shape == b.shape, ErrorCode::DimensionMismatch, "inner product of differently shaped grids");
    return a.data.template cast<double>().dot(b.data.template cast<double>());
}

} // namespace argrid
