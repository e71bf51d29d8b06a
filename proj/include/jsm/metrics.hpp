#pragma once

#include <jsm/image.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace jsm {

inline double max_abs_diff(ImageBuffer const& a, ImageBuffer const& b)
{
    require_same_size(a, b, "max_abs_diff");
    if (a.channels() != b.channels())
        throw ShapeError("max_abs_diff: channel mismatch");
    double m = 0.0;
    auto sa = a.samples();
    auto sb = b.samples();
    for (std::size_t i = 0; i < sa.size(); ++i)
        m = std::max(m, std::abs(sa[i] - sb[i]));
    return m;
}

/// Peak signal-to-noise ratio in dB for a peak of 1. Identical inputs give +inf.
inline double psnr(ImageBuffer const& a, ImageBuffer const& b)
{
    require_same_size(a, b, "psnr");
    if (a.channels() != b.channels())
        throw ShapeError("psnr: channel mismatch");
    double sse = 0.0;
    auto sa = a.samples();
    auto sb = b.samples();
    for (std::size_t i = 0; i < sa.size(); ++i) {
        double const d = sa[i] - sb[i];
        sse += d * d;
    }
    double const mse = sse / static_cast<double>(sa.size());
    return mse == 0.0 ? std::numeric_limits<double>::infinity() : -10.0 * std::log10(mse);
}

/// Population variance over the pixels where mask != 0 (all pixels if mask is empty).
inline double masked_variance(std::span<double const> values, std::span<std::uint8_t const> mask = {})
{
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (mask.empty() || mask[i]) {
            sum += values[i];
            ++n;
        }
    if (n == 0)
        return 0.0;
    double const mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (mask.empty() || mask[i]) {
            double const d = values[i] - mean;
            ss += d * d;
        }
    return ss / static_cast<double>(n);
}

/// RMS contrast: standard deviation of a luminance plane.
inline double rms_contrast(ImageBuffer const& luminance)
{
    require_channels(luminance, 1, "rms_contrast");
    return std::sqrt(masked_variance(luminance.plane()));
}

/// Variance of the texture signal A·S_D (albedo-weighted detail shading) in a region.
inline double detail_variance(ImageBuffer const& albedo, ImageBuffer const& detail,
                              std::span<std::uint8_t const> mask = {})
{
    require_same_size(albedo, detail, "detail_variance");
    auto a = albedo.plane();
    auto d = detail.plane();
    std::vector<double> texture(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        texture[i] = a[i] * d[i];
    return masked_variance(texture, mask);
}

} // namespace jsm
