// SPDX-License-Identifier: Apache-2.0
//
// OpenMP production path. Loops parallelize over disjoint output elements
// (rows, patches, query positions); reductions materialize per-element
// partials and sum them in a fixed order, so results match the serial
// reference bit-for-bit at any thread count.

#include "kernels_detail.hpp"
#include "mmist/kernels.hpp"

namespace mmist::kernels {

Image bilinear_resize(const Image& src, int out_h, int out_w) {
    Image out(out_h, out_w);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < out_h; ++y) {
        const detail::Tap ty = detail::resize_tap(y, out_h, src.height);
        for (int x = 0; x < out_w; ++x) {
            const detail::Tap tx = detail::resize_tap(x, out_w, src.width);
            detail::resize_pixel(src, ty, tx, &out.at(y, x, 0));
        }
    }
    return out;
}

Image bilinear_resize_vjp(int src_h, int src_w, const Image& grad_out) {
    const auto rows = detail::resize_reverse_taps(grad_out.height, src_h);
    const auto cols = detail::resize_reverse_taps(grad_out.width, src_w);
    Image grad(src_h, src_w);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < src_h; ++r) {
        for (int c = 0; c < src_w; ++c) {
            double acc[3] = {0, 0, 0};
            for (const auto& [y, wy] : rows[r])
                for (const auto& [x, wx] : cols[c])
                    for (int ch = 0; ch < 3; ++ch) acc[ch] += wy * wx * grad_out.at(y, x, ch);
            for (int ch = 0; ch < 3; ++ch) grad.at(r, c, ch) = acc[ch];
        }
    }
    return grad;
}

Image warp_perspective(const Image& src, const Homography& out_to_src) {
    Image out(src.height, src.width);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            double sx, sy;
            out_to_src.apply(x, y, sx, sy);
            detail::warp_sample(src, sx, sy, &out.at(y, x, 0));
        }
    }
    return out;
}

Image warp_perspective_vjp(int src_h, int src_w, const Homography& out_to_src,
                           const Image& grad_out) {
    // Scatter adjoint; stays serial (see header). Patch-level callers run one
    // vjp per task in parallel instead.
    return ref::warp_perspective_vjp(src_h, src_w, out_to_src, grad_out);
}

Image crop(const Image& src, int origin_x, int origin_y, int side) {
    return ref::crop(src, origin_x, origin_y, side);
}

void accumulate_crop_grads(const std::vector<Image>& patch_grads, const std::vector<int>& origin_x,
                           const std::vector<int>& origin_y, Image& grad_image) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < grad_image.height; ++y) {
        for (std::size_t j = 0; j < patch_grads.size(); ++j) {
            const Image& p = patch_grads[j];
            const int py = y - origin_y[j];
            if (py < 0 || py >= p.height) continue;
            for (int px = 0; px < p.width; ++px)
                for (int c = 0; c < 3; ++c)
                    grad_image.at(y, origin_x[j] + px, c) += p.at(py, px, c);
        }
    }
}

void matvec(const double* m, int rows, int cols, const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r)
        y[r] = detail::dot(m + static_cast<std::size_t>(r) * cols, x, cols);
}

void matvec_transpose(const double* m, int rows, int cols, const double* y, double* x) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < cols; ++c) {
        double s = 0.0;
        for (int r = 0; r < rows; ++r) s += m[static_cast<std::size_t>(r) * cols + c] * y[r];
        x[c] = s;
    }
}

double mean_directional_loss(const double* dirs, int n, int dim, const double* target) {
    std::vector<double> terms(n);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j)
        terms[j] = detail::directional_term(dirs + static_cast<std::size_t>(j) * dim, target, dim);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += terms[j];
    return s / n;
}

void mean_directional_loss_vjp(const double* dirs, int n, int dim, const double* target,
                               double upstream, double* grad_dirs) {
    const double u = upstream / n;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j)
        detail::directional_term_grad_a(dirs + static_cast<std::size_t>(j) * dim, target, dim, u,
                                        grad_dirs + static_cast<std::size_t>(j) * dim);
}

double pairwise_directional_loss(const double* a, int na, const double* b, int nb, int dim) {
    std::vector<double> partial(na);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < na; ++j) {
        double s = 0.0;
        for (int k = 0; k < nb; ++k)
            s += detail::directional_term(a + static_cast<std::size_t>(j) * dim,
                                          b + static_cast<std::size_t>(k) * dim, dim);
        partial[j] = s;
    }
    double s = 0.0;
    for (int j = 0; j < na; ++j) s += partial[j];
    return s / (static_cast<double>(na) * nb);
}

void pairwise_directional_loss_vjp(const double* a, int na, const double* b, int nb, int dim,
                                   double upstream, double* grad_a) {
    const double u = upstream / (static_cast<double>(na) * nb);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < na; ++j)
        for (int k = 0; k < nb; ++k)
            detail::directional_term_grad_a(a + static_cast<std::size_t>(j) * dim,
                                            b + static_cast<std::size_t>(k) * dim, dim, u,
                                            grad_a + static_cast<std::size_t>(j) * dim);
}

void attention_mean_std(const double* q, const double* k, const double* v, int channels,
                        int n_query, int n_key, double* mean_out, double* std_out) {
#pragma omp parallel
    {
        std::vector<double> scratch(n_key);
#pragma omp for schedule(static)
        for (int qi = 0; qi < n_query; ++qi)
            detail::attention_query(q, k, v, channels, n_query, n_key, qi, scratch.data(),
                                    mean_out, std_out);
    }
}

void channel_normalize(const double* x, int channels, int n, double eps, double* y) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels; ++c)
        detail::channel_normalize_one(x + static_cast<std::size_t>(c) * n, n, eps,
                                      y + static_cast<std::size_t>(c) * n);
}

void avg_pool_rgb(const Image& img, int stride, double* out) {
    const int oh = img.height / stride;
    const int ow = img.width / stride;
#pragma omp parallel for schedule(static) collapse(2)
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x)
                detail::avg_pool_cell(img, stride, c, y, x,
                                      out + (static_cast<std::size_t>(c) * oh + y) * ow + x);
}

void conv1x1(const double* in, int c_in, int n, const double* w, int c_out, double* out) {
#pragma omp parallel for schedule(static) collapse(2)
    for (int co = 0; co < c_out; ++co) {
        for (int p = 0; p < n; ++p) {
            double s = 0.0;
            for (int ci = 0; ci < c_in; ++ci)
                s += w[static_cast<std::size_t>(co) * c_in + ci] *
                     in[static_cast<std::size_t>(ci) * n + p];
            out[static_cast<std::size_t>(co) * n + p] = s;
        }
    }
}

}  // namespace mmist::kernels
