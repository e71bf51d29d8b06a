#pragma once

#include <jsm/image.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace jsm {

/// Division guard: luminance below this is treated as black.
inline constexpr double kEpsDiv = 1e-4;
/// Upper bound for per-channel chroma ratios.
inline constexpr double kRatioMax = 16.0;

/// BT.709 weights applied to linear RGB.
inline constexpr std::array<double, 3> kLuminanceWeights{0.2126, 0.7152, 0.0722};

/// sRGB electro-optical transfer: encoded [0,1] -> linear [0,1].
inline double srgb_to_linear(double v) noexcept
{
    v = std::clamp(v, 0.0, 1.0);
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

/// Inverse of srgb_to_linear.
inline double linear_to_srgb(double v) noexcept
{
    v = std::clamp(v, 0.0, 1.0);
    return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

/// Per-pixel channel-to-luminance ratios of a colour image.
///
/// Planes 0..2 hold r_R, r_G, r_B, each in [0, kRatioMax].
class ChromaRatios
{
public:
    explicit ChromaRatios(ImageBuffer ratios) : _ratios(std::move(ratios))
    {
        require_channels(_ratios, 3, "ChromaRatios");
    }

    /// Unit ratios everywhere (achromatic).
    static ChromaRatios neutral(int width, int height)
    {
        return ChromaRatios(ImageBuffer(width, height, 3, 1.0));
    }

    int width() const noexcept { return _ratios.width(); }
    int height() const noexcept { return _ratios.height(); }
    ImageBuffer const& planes() const noexcept { return _ratios; }
    std::span<double const> plane(int c) const noexcept { return _ratios.plane(c); }

private:
    ImageBuffer _ratios;
};

inline ImageBuffer luminance_of(ImageBuffer const& img)
{
    require_channels(img, 3, "luminance_of");
    ImageBuffer y(img.width(), img.height(), 1);
    auto r = img.plane(0);
    auto g = img.plane(1);
    auto b = img.plane(2);
    auto out = y.plane();
    for (std::size_t i = 0; i < out.size(); ++i) {
        double const v = kLuminanceWeights[0] * r[i] + kLuminanceWeights[1] * g[i]
                         + kLuminanceWeights[2] * b[i];
        out[i] = std::clamp(v, 0.0, 1.0);
    }
    return y;
}

inline ChromaRatios chroma_of(ImageBuffer const& img, ImageBuffer const& y)
{
    require_channels(img, 3, "chroma_of");
    require_channels(y, 1, "chroma_of");
    require_same_size(img, y, "chroma_of");
    ImageBuffer ratios(img.width(), img.height(), 3, 1.0);
    auto lum = y.plane();
    for (int c = 0; c < 3; ++c) {
        auto src = img.plane(c);
        auto dst = ratios.plane(c);
        for (std::size_t i = 0; i < lum.size(); ++i)
            if (lum[i] >= kEpsDiv)
                dst[i] = std::clamp(src[i] / lum[i], 0.0, kRatioMax);
    }
    return ChromaRatios(std::move(ratios));
}

/// Rebuilds colour from a luminance plane and chroma ratios; clamps to [0,1].
inline ImageBuffer apply_chroma(ImageBuffer const& y, ChromaRatios const& chroma)
{
    require_channels(y, 1, "apply_chroma");
    require_same_size(y, chroma.planes(), "apply_chroma");
    ImageBuffer out(y.width(), y.height(), 3);
    auto lum = y.plane();
    for (int c = 0; c < 3; ++c) {
        auto ratio = chroma.plane(c);
        auto dst = out.plane(c);
        for (std::size_t i = 0; i < lum.size(); ++i)
            dst[i] = std::clamp(ratio[i] * lum[i], 0.0, 1.0);
    }
    return out;
}

/// Grey image with every channel equal to the given plane.
inline ImageBuffer gray_to_rgb(ImageBuffer const& y)
{
    require_channels(y, 1, "gray_to_rgb");
    return merge_channels(y, y, y);
}

} // namespace jsm
