#pragma once

#include <jsm/color.hpp>
#include <jsm/guided_filter.hpp>
#include <jsm/image.hpp>
#include <jsm/parallel.hpp>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace jsm {

/// Ceiling for the shading plane I_y / A_y.
inline constexpr double kShadingMax = 4.0;

struct DecompParams
{
    int albedo_radius = 16;
    double albedo_eps = 0.02 * 0.02;
    int shading_radius = 8;
    double shading_eps = 0.1 * 0.1;

    GuidedFilterParams albedo_filter() const { return {albedo_radius, albedo_eps}; }
    GuidedFilterParams shading_filter() const { return {shading_radius, shading_eps}; }

    void validate() const
    {
        if (albedo_radius < 1 || shading_radius < 1)
            throw ConfigError("decomposition radii must be >= 1");
        if (!(albedo_eps > 0.0) || !(shading_eps > 0.0))
            throw ConfigError("decomposition epsilons must be > 0");
    }
};

struct AlbedoEstimate
{
    ImageBuffer luminance; ///< A_y in [kEpsDiv, 1]
    ChromaRatios chroma;   ///< chroma of the filtered colour albedo
};

struct ShadingLayers
{
    ImageBuffer base;   ///< S_B
    ImageBuffer detail; ///< S_D = S − S_B
};

/// Luminance split into albedo times (base + detail) shading.
struct Decomposition
{
    ImageBuffer albedo;    ///< A_y
    ImageBuffer base;      ///< S_B
    ImageBuffer detail;    ///< S_D
    ChromaRatios chroma;   ///< ratios of the input colour to its luminance
    ImageBuffer luminance; ///< I_y of the input
    /// 1 where the albedo floor or the shading ceiling fired.
    std::vector<std::uint8_t> guarded;
};

/// Albedo as the guided-filtered colour image, each channel guided by the
/// input luminance.
inline AlbedoEstimate extract_albedo(ImageBuffer const& rgb, DecompParams const& p,
                                     Execution exec = {})
{
    require_channels(rgb, 3, "extract_albedo");
    p.validate();
    ImageBuffer const guide = luminance_of(rgb);
    auto const filter = p.albedo_filter();
    ImageBuffer const albedo_rgb = merge_channels(guided_filter_fast(guide, rgb.channel(0), filter, exec),
                                                  guided_filter_fast(guide, rgb.channel(1), filter, exec),
                                                  guided_filter_fast(guide, rgb.channel(2), filter, exec));
    ImageBuffer albedo_y = luminance_of(albedo_rgb);
    clamp_samples(albedo_y, kEpsDiv, 1.0);
    ChromaRatios chroma = chroma_of(albedo_rgb, albedo_y);
    return {std::move(albedo_y), std::move(chroma)};
}

/// S = I_y / A_y, clamped to [0, kShadingMax].
inline ImageBuffer derive_shading(ImageBuffer const& luminance, ImageBuffer const& albedo)
{
    require_channels(luminance, 1, "derive_shading");
    require_channels(albedo, 1, "derive_shading");
    require_same_size(luminance, albedo, "derive_shading");
    ImageBuffer shading(luminance.width(), luminance.height(), 1);
    auto i_y = luminance.plane();
    auto a_y = albedo.plane();
    auto s = shading.plane();
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = std::clamp(i_y[i] / std::max(a_y[i], kEpsDiv), 0.0, kShadingMax);
    return shading;
}

/// Additive base/detail split: S_B is the self-guided filter of S, S_D the residual.
inline ShadingLayers split_shading(ImageBuffer const& shading, DecompParams const& p,
                                   Execution exec = {})
{
    require_channels(shading, 1, "split_shading");
    p.validate();
    ImageBuffer base = guided_filter_fast(shading, shading, p.shading_filter(), exec);
    ImageBuffer detail(shading.width(), shading.height(), 1);
    auto s = shading.plane();
    auto sb = base.plane();
    auto sd = detail.plane();
    for (std::size_t i = 0; i < s.size(); ++i)
        sd[i] = s[i] - sb[i];
    return {std::move(base), std::move(detail)};
}

inline Decomposition decompose(ImageBuffer const& rgb, DecompParams const& p, Execution exec = {})
{
    require_channels(rgb, 3, "decompose");
    ImageBuffer luminance = luminance_of(rgb);
    AlbedoEstimate albedo = extract_albedo(rgb, p, exec);
    ImageBuffer const shading = derive_shading(luminance, albedo.luminance);
    ShadingLayers layers = split_shading(shading, p, exec);

    std::vector<std::uint8_t> guarded(rgb.pixel_count(), 0);
    auto a_y = albedo.luminance.plane();
    auto i_y = luminance.plane();
    for (std::size_t i = 0; i < guarded.size(); ++i) {
        bool const at_floor = a_y[i] <= kEpsDiv;
        bool const shading_clamped = i_y[i] / a_y[i] > kShadingMax;
        guarded[i] = (at_floor || shading_clamped) ? 1 : 0;
    }
    ChromaRatios chroma = chroma_of(rgb, luminance);
    return Decomposition{std::move(albedo.luminance), std::move(layers.base),
                         std::move(layers.detail),    std::move(chroma),
                         std::move(luminance),        std::move(guarded)};
}

} // namespace jsm
