#pragma once

#include <jsm/image.hpp>

#include <algorithm>
#include <cmath>

namespace jsm {

namespace detail {

// Corner-aligned source coordinate: output 0 -> input 0, output n-1 -> input m-1.
inline double source_coord(int dst, int dst_size, int src_size) noexcept
{
    if (dst_size <= 1 || src_size <= 1)
        return 0.0;
    return static_cast<double>(dst) * (src_size - 1) / (dst_size - 1);
}

} // namespace detail

/// Bilinear resize with corner-aligned sampling.
///
/// Interpolation is written as a + t·(b − a) so constant regions stay exact,
/// and same-size requests return an exact copy.
inline ImageBuffer resize_bilinear(ImageBuffer const& src, int width, int height)
{
    if (width == src.width() && height == src.height())
        return src;
    ImageBuffer out(width, height, src.channels());
    for (int y = 0; y < height; ++y) {
        double const sy = detail::source_coord(y, height, src.height());
        int const y0 = std::min(static_cast<int>(sy), src.height() - 1);
        int const y1 = std::min(y0 + 1, src.height() - 1);
        double const ty = sy - y0;
        for (int x = 0; x < width; ++x) {
            double const sx = detail::source_coord(x, width, src.width());
            int const x0 = std::min(static_cast<int>(sx), src.width() - 1);
            int const x1 = std::min(x0 + 1, src.width() - 1);
            double const tx = sx - x0;
            for (int c = 0; c < src.channels(); ++c) {
                double const a = src(x0, y0, c);
                double const b = src(x1, y0, c);
                double const d = src(x0, y1, c);
                double const e = src(x1, y1, c);
                double const top = a + tx * (b - a);
                double const bottom = d + tx * (e - d);
                out(x, y, c) = top + ty * (bottom - top);
            }
        }
    }
    return out;
}

} // namespace jsm
