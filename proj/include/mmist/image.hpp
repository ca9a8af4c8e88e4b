// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace mmist {

/// Interleaved RGB raster with double channels. Valid pipeline images keep
/// every channel in [0,1]; gradient buffers reuse the same layout without
/// the range constraint.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // height * width * 3, row-major, RGB interleaved

    Image() = default;
    Image(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, 0.0) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
    bool empty() const { return data.empty(); }
};

inline bool same_shape(const Image& a, const Image& b) {
    return a.height == b.height && a.width == b.width;
}

inline Image constant_image(int h, int w, double r, double g, double b) {
    Image img(h, w);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.data[3 * i + 0] = r;
        img.data[3 * i + 1] = g;
        img.data[3 * i + 2] = b;
    }
    return img;
}

bool image_finite(const Image& img);
bool image_in_unit_range(const Image& img);

/// Deterministic synthetic photo-like image (smooth sky/ground gradient with
/// a few solid shapes). Serves as the bundled default I_src so the toolkit
/// has no binary assets.
Image default_source_image(int side = 512);

}  // namespace mmist
