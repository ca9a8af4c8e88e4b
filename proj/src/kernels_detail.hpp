// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "mmist/image.hpp"
#include "mmist/kernels.hpp"

// Per-element helpers shared by the serial reference and the OpenMP path.
// Keeping the arithmetic in one place is what makes the two paths bit-equal.

namespace mmist::kernels::detail {

struct Tap {
    int i0, i1;
    double f;  // weight of i1; i0 gets (1 - f)
};

inline Tap resize_tap(int out_idx, int out_size, int src_size) {
    const double scale = static_cast<double>(src_size) / out_size;
    double s = (out_idx + 0.5) * scale - 0.5;
    if (s < 0.0) s = 0.0;
    const double smax = static_cast<double>(src_size - 1);
    if (s > smax) s = smax;
    int i0 = static_cast<int>(s);
    if (i0 > src_size - 1) i0 = src_size - 1;
    const int i1 = std::min(i0 + 1, src_size - 1);
    return Tap{i0, i1, s - i0};
}

inline void resize_pixel(const Image& src, const Tap& ty, const Tap& tx, double* out3) {
    for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - tx.f) * src.at(ty.i0, tx.i0, c) + tx.f * src.at(ty.i0, tx.i1, c);
        const double bot = (1.0 - tx.f) * src.at(ty.i1, tx.i0, c) + tx.f * src.at(ty.i1, tx.i1, c);
        out3[c] = (1.0 - ty.f) * top + ty.f * bot;
    }
}

// Reverse adjacency for the resize adjoint: for every source index, the list
// of (output index, weight) pairs that read it, in ascending output order.
inline std::vector<std::vector<std::pair<int, double>>> resize_reverse_taps(int out_size,
                                                                            int src_size) {
    std::vector<std::vector<std::pair<int, double>>> rev(src_size);
    for (int o = 0; o < out_size; ++o) {
        const Tap t = resize_tap(o, out_size, src_size);
        rev[t.i0].emplace_back(o, 1.0 - t.f);
        rev[t.i1].emplace_back(o, t.f);
    }
    return rev;
}

// Bilinear sample with zero fill outside [0, w) x [0, h).
inline void warp_sample(const Image& src, double sx, double sy, double* out3) {
    const int ix = static_cast<int>(std::floor(sx));
    const int iy = static_cast<int>(std::floor(sy));
    const double fx = sx - ix;
    const double fy = sy - iy;
    const double w00 = (1.0 - fy) * (1.0 - fx);
    const double w01 = (1.0 - fy) * fx;
    const double w10 = fy * (1.0 - fx);
    const double w11 = fy * fx;
    out3[0] = out3[1] = out3[2] = 0.0;
    const auto add = [&](int y, int x, double w) {
        if (y < 0 || y >= src.height || x < 0 || x >= src.width) return;
        for (int c = 0; c < 3; ++c) out3[c] += w * src.at(y, x, c);
    };
    add(iy, ix, w00);
    add(iy, ix + 1, w01);
    add(iy + 1, ix, w10);
    add(iy + 1, ix + 1, w11);
}

inline void warp_scatter(Image& grad_src, double sx, double sy, const double* up3) {
    const int ix = static_cast<int>(std::floor(sx));
    const int iy = static_cast<int>(std::floor(sy));
    const double fx = sx - ix;
    const double fy = sy - iy;
    const auto add = [&](int y, int x, double w) {
        if (y < 0 || y >= grad_src.height || x < 0 || x >= grad_src.width) return;
        for (int c = 0; c < 3; ++c) grad_src.at(y, x, c) += w * up3[c];
    };
    add(iy, ix, (1.0 - fy) * (1.0 - fx));
    add(iy, ix + 1, (1.0 - fy) * fx);
    add(iy + 1, ix, fy * (1.0 - fx));
    add(iy + 1, ix + 1, fy * fx);
}

inline double dot(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const double* a, int dim) { return std::sqrt(dot(a, a, dim)); }

/// 1 - cos(a, b), cosine clamped to [-1, 1]; degenerate pairs give the neutral term.
inline double directional_term(const double* a, const double* b, int dim) {
    const double na = norm(a, dim);
    const double nb = norm(b, dim);
    if (na < kZeroDirectionNorm || nb < kZeroDirectionNorm) return kNeutralLossTerm;
    const double c = std::clamp(dot(a, b, dim) / (na * nb), -1.0, 1.0);
    return 1.0 - c;
}

/// grad_a += upstream * d(directional_term)/da.
inline void directional_term_grad_a(const double* a, const double* b, int dim, double upstream,
                                    double* grad_a) {
    const double na = norm(a, dim);
    const double nb = norm(b, dim);
    if (na < kZeroDirectionNorm || nb < kZeroDirectionNorm) return;
    const double s = dot(a, b, dim);
    const double c = s / (na * nb);
    if (c <= -1.0 || c >= 1.0) return;  // clamped region, flat
    const double inv = 1.0 / (na * nb);
    const double coef = s / (na * na * na * nb);
    for (int i = 0; i < dim; ++i) grad_a[i] += upstream * (coef * a[i] - inv * b[i]);
}

/// Attention statistics for one query position. scratch must hold n_key doubles.
inline void attention_query(const double* q, const double* k, const double* v, int channels,
                            int n_query, int n_key, int qi, double* scratch, double* mean_out,
                            double* std_out) {
    const double inv_sqrt_c = 1.0 / std::sqrt(static_cast<double>(channels));
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int ki = 0; ki < n_key; ++ki) {
        double l = 0.0;
        for (int c = 0; c < channels; ++c)
            l += q[static_cast<std::size_t>(c) * n_query + qi] *
                 k[static_cast<std::size_t>(c) * n_key + ki];
        l *= inv_sqrt_c;
        scratch[ki] = l;
        if (l > max_logit) max_logit = l;
    }
    double z = 0.0;
    for (int ki = 0; ki < n_key; ++ki) {
        scratch[ki] = std::exp(scratch[ki] - max_logit);
        z += scratch[ki];
    }
    const double inv_z = 1.0 / z;
    for (int c = 0; c < channels; ++c) {
        const double* vc = v + static_cast<std::size_t>(c) * n_key;
        double m = 0.0, e2 = 0.0;
        for (int ki = 0; ki < n_key; ++ki) {
            const double a = scratch[ki] * inv_z;
            m += a * vc[ki];
            e2 += a * vc[ki] * vc[ki];
        }
        mean_out[static_cast<std::size_t>(c) * n_query + qi] = m;
        std_out[static_cast<std::size_t>(c) * n_query + qi] = std::sqrt(std::max(e2 - m * m, 0.0));
    }
}

inline void channel_normalize_one(const double* x, int n, double eps, double* y) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += x[i];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        var += d * d;
    }
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int i = 0; i < n; ++i) y[i] = (x[i] - mean) * inv;
}

inline void avg_pool_cell(const Image& img, int stride, int c, int oy, int ox, double* out_val) {
    double s = 0.0;
    for (int y = 0; y < stride; ++y)
        for (int x = 0; x < stride; ++x) s += img.at(oy * stride + y, ox * stride + x, c);
    *out_val = s / (stride * stride);
}

}  // namespace mmist::kernels::detail
