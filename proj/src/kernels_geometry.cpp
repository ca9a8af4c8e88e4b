// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <cmath>

#include "mmist/image.hpp"
#include "mmist/kernels.hpp"

namespace mmist::kernels {

Homography solve_homography(const double from[4][2], const double to[4][2]) {
    // Standard DLT with h22 pinned to 1: eight equations, eight unknowns.
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> b;
    for (int i = 0; i < 4; ++i) {
        const double x = from[i][0], y = from[i][1];
        const double u = to[i][0], v = to[i][1];
        a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
        a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
        b(2 * i) = u;
        b(2 * i + 1) = v;
    }
    const Eigen::Matrix<double, 8, 1> h = a.colPivHouseholderQr().solve(b);
    Homography out;
    for (int i = 0; i < 8; ++i) out.m[i] = h(i);
    out.m[8] = 1.0;
    return out;
}

}  // namespace mmist::kernels

namespace mmist {

bool image_finite(const Image& img) {
    for (double v : img.data)
        if (!std::isfinite(v)) return false;
    return true;
}

bool image_in_unit_range(const Image& img) {
    for (double v : img.data)
        if (!(v >= 0.0 && v <= 1.0)) return false;
    return true;
}

Image default_source_image(int side) {
    Image img(side, side);
    const double inv = 1.0 / (side - 1);
    for (int y = 0; y < side; ++y) {
        const double t = y * inv;
        for (int x = 0; x < side; ++x) {
            const double s = x * inv;
            // Sky gradient into a darker ground plane.
            double r = 0.45 + 0.25 * t;
            double g = 0.62 - 0.20 * t;
            double b = 0.86 - 0.42 * t;
            if (t > 0.66) {
                r = 0.32 + 0.10 * s;
                g = 0.40 - 0.08 * t;
                b = 0.22;
            }
            // Sun disc.
            const double dx = s - 0.72, dy = t - 0.22;
            if (dx * dx + dy * dy < 0.006) {
                r = 0.98;
                g = 0.92;
                b = 0.70;
            }
            // Distant box on the horizon.
            if (s > 0.18 && s < 0.30 && t > 0.52 && t < 0.66) {
                r = 0.55;
                g = 0.50;
                b = 0.46;
            }
            img.at(y, x, 0) = r;
            img.at(y, x, 1) = g;
            img.at(y, x, 2) = b;
        }
    }
    return img;
}

}  // namespace mmist
