// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mmist/image.hpp"

// Numeric kernels behind every module. The functions in mmist::kernels are
// the OpenMP production path; mmist::kernels::ref holds the serial reference
// implementations used by the equivalence tests and the benchmark target.
//
// Both paths share per-element helpers, and every parallel loop assigns each
// output element to exactly one thread with a fixed inner summation order,
// so ref and parallel results are bit-identical regardless of thread count.

namespace mmist::kernels {

/// Directions with a norm below this are treated as degenerate.
constexpr double kZeroDirectionNorm = 1e-8;
/// Loss contribution of a degenerate cosine term (cosine taken as 0).
constexpr double kNeutralLossTerm = 1.0;

/// Row-major 3x3 projective transform.
struct Homography {
    double m[9];

    static Homography identity() { return Homography{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }

    void apply(double x, double y, double& ox, double& oy) const {
        const double w = m[6] * x + m[7] * y + m[8];
        ox = (m[0] * x + m[1] * y + m[2]) / w;
        oy = (m[3] * x + m[4] * y + m[5]) / w;
    }
};

/// Exact 4-point homography with H * from_i ~ to_i (projectively).
Homography solve_homography(const double from[4][2], const double to[4][2]);

// --- geometry ---------------------------------------------------------------

/// Half-pixel-center bilinear resize with edge clamping (corner alignment off).
Image bilinear_resize(const Image& src, int out_h, int out_w);
/// Adjoint of bilinear_resize for a source of shape (src_h, src_w).
Image bilinear_resize_vjp(int src_h, int src_w, const Image& grad_out);

/// Samples src at out_to_src(x, y) per output pixel; zero fill outside.
/// Output has the same shape as src.
Image warp_perspective(const Image& src, const Homography& out_to_src);
/// Adjoint of warp_perspective. Scatter-based and serial in both namespaces;
/// callers parallelize across patches instead.
Image warp_perspective_vjp(int src_h, int src_w, const Homography& out_to_src,
                           const Image& grad_out);

Image crop(const Image& src, int origin_x, int origin_y, int side);

/// grad_image[region_j] += patch_grads[j], accumulated in patch index order.
void accumulate_crop_grads(const std::vector<Image>& patch_grads,
                           const std::vector<int>& origin_x, const std::vector<int>& origin_y,
                           Image& grad_image);

// --- dense linear algebra ----------------------------------------------------

/// y = M x with M row-major (rows x cols).
void matvec(const double* m, int rows, int cols, const double* x, double* y);
/// x = M^T y.
void matvec_transpose(const double* m, int rows, int cols, const double* y, double* x);

// --- directional losses ------------------------------------------------------

/// mean_j (1 - cos(dirs_j, target)); degenerate terms contribute the neutral value.
double mean_directional_loss(const double* dirs, int n, int dim, const double* target);
/// grad_dirs += upstream * d(mean_directional_loss)/d(dirs).
void mean_directional_loss_vjp(const double* dirs, int n, int dim, const double* target,
                               double upstream, double* grad_dirs);

/// (1/(na*nb)) sum_{j,k} (1 - cos(a_j, b_k)).
double pairwise_directional_loss(const double* a, int na, const double* b, int nb, int dim);
/// grad_a += upstream * d(pairwise_directional_loss)/d(a).
void pairwise_directional_loss_vjp(const double* a, int na, const double* b, int nb, int dim,
                                   double upstream, double* grad_a);

// --- attention statistics ----------------------------------------------------

/// Scaled dot-product attention statistics over a style bank.
/// q: (channels x n_query), k/v: (channels x n_key), all plane-major.
/// Per query position: softmax_k(q . k / sqrt(channels)), then
/// mean_out = A V^T and std_out = sqrt(max(A (V*V)^T - mean^2, 0)).
void attention_mean_std(const double* q, const double* k, const double* v, int channels,
                        int n_query, int n_key, double* mean_out, double* std_out);

/// Per-channel (x - mean) / sqrt(population variance + eps) over n positions.
void channel_normalize(const double* x, int channels, int n, double eps, double* y);

// --- feature plumbing ---------------------------------------------------------

/// Mean pool an interleaved RGB image into 3 plane-major channel planes of
/// shape (h/stride, w/stride). Requires stride to divide both sides.
void avg_pool_rgb(const Image& img, int stride, double* out);

/// out[co, p] = sum_ci w[co, ci] * in[ci, p], planes of n positions each.
void conv1x1(const double* in, int c_in, int n, const double* w, int c_out, double* out);

// --- serial reference implementations -----------------------------------------

namespace ref {

Image bilinear_resize(const Image& src, int out_h, int out_w);
Image bilinear_resize_vjp(int src_h, int src_w, const Image& grad_out);
Image warp_perspective(const Image& src, const Homography& out_to_src);
Image warp_perspective_vjp(int src_h, int src_w, const Homography& out_to_src,
                           const Image& grad_out);
Image crop(const Image& src, int origin_x, int origin_y, int side);
void accumulate_crop_grads(const std::vector<Image>& patch_grads,
                           const std::vector<int>& origin_x, const std::vector<int>& origin_y,
                           Image& grad_image);
void matvec(const double* m, int rows, int cols, const double* x, double* y);
void matvec_transpose(const double* m, int rows, int cols, const double* y, double* x);
double mean_directional_loss(const double* dirs, int n, int dim, const double* target);
void mean_directional_loss_vjp(const double* dirs, int n, int dim, const double* target,
                               double upstream, double* grad_dirs);
double pairwise_directional_loss(const double* a, int na, const double* b, int nb, int dim);
void pairwise_directional_loss_vjp(const double* a, int na, const double* b, int nb, int dim,
                                   double upstream, double* grad_a);
void attention_mean_std(const double* q, const double* k, const double* v, int channels,
                        int n_query, int n_key, double* mean_out, double* std_out);
void channel_normalize(const double* x, int channels, int n, double eps, double* y);
void avg_pool_rgb(const Image& img, int stride, double* out);
void conv1x1(const double* in, int c_in, int n, const double* w, int c_out, double* out);

}  // namespace ref

}  // namespace mmist::kernels
