#pragma once

#include <jsm/color.hpp>
#include <jsm/decomposition.hpp>
#include <jsm/depth.hpp>
#include <jsm/image.hpp>
#include <jsm/parallel.hpp>

#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>

namespace jsm {

/// Sub-operator switches, in the order they are enabled in the ablation study.
struct Ablation
{
    bool base_shading = true;
    bool detail_shading = true;
    bool shading_contrast = true;
    bool albedo_contrast = true;

    static Ablation none() { return {false, false, false, false}; }
    bool operator==(Ablation const&) const = default;
};

struct RetargetParams
{
    double gamma = 0.8;
    double trunc_lo = 0.05;
    double trunc_hi = 2.0;
    double detail_gain = 1.8;
    double alpha_shading = 0.3;
    double beta_texture = 0.4;
    double albedo_contrast = 1.25;
    std::optional<double> albedo_pivot; ///< defaults to the image's mean albedo
    Ablation ablation;

    /// Every operator reduces to the identity.
    static RetargetParams identity()
    {
        RetargetParams p;
        p.gamma = 1.0;
        p.trunc_lo = 0.0;
        p.trunc_hi = kShadingMax;
        p.detail_gain = 1.0;
        p.alpha_shading = 0.0;
        p.beta_texture = 0.0;
        p.albedo_contrast = 1.0;
        return p;
    }

    void validate() const
    {
        auto fail = [](std::string const& msg) { throw ConfigError("retarget: " + msg); };
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            fail("gamma must be > 0");
        if (!(trunc_lo >= 0.0 && trunc_lo < trunc_hi && trunc_hi <= kShadingMax))
            fail("truncation bounds must satisfy 0 <= lo < hi <= " + std::to_string(kShadingMax));
        if (!(detail_gain >= 0.0) || !std::isfinite(detail_gain))
            fail("detail_gain must be >= 0");
        if (!(alpha_shading >= 0.0 && alpha_shading < 1.0))
            fail("alpha_shading must lie in [0,1)");
        if (!(beta_texture >= 0.0 && beta_texture < 1.0))
            fail("beta_texture must lie in [0,1)");
        if (!(albedo_contrast > 0.0) || !std::isfinite(albedo_contrast))
            fail("albedo_contrast must be > 0");
        if (albedo_pivot && !(*albedo_pivot > 0.0 && *albedo_pivot < 1.0))
            fail("albedo_pivot must lie in (0,1)");
    }
};

/// Truncated power curve on base shading, normalized so trunc_hi is fixed.
inline ImageBuffer retarget_base(ImageBuffer const& base, RetargetParams const& p)
{
    require_channels(base, 1, "retarget_base");
    ImageBuffer out = base;
    if (!p.ablation.base_shading)
        return out;
    for (double& s : out.samples()) {
        double const t = std::clamp(s, p.trunc_lo, p.trunc_hi);
        s = p.trunc_hi * std::pow(t / p.trunc_hi, p.gamma);
    }
    return out;
}

/// Linear gain on detail shading.
inline ImageBuffer boost_detail(ImageBuffer const& detail, RetargetParams const& p)
{
    require_channels(detail, 1, "boost_detail");
    ImageBuffer out = detail;
    if (!p.ablation.detail_shading)
        return out;
    for (double& s : out.samples())
        s *= p.detail_gain;
    return out;
}

/// w = 1 + gain·(2d − 1): above 1 for near pixels, below 1 for far ones.
inline ImageBuffer depth_weight(DepthProfile const& profile, double gain)
{
    if (!(gain >= 0.0 && gain < 1.0))
        throw ConfigError("depth weight gain must lie in [0,1)");
    ImageBuffer w = effective_nearness(profile);
    for (double& v : w.samples())
        v = 1.0 + gain * (2.0 * v - 1.0);
    return w;
}

/// Depth-weighted shading and texture contrast.
///
/// Base shading deviates from the neutral value 1 by a depth-dependent factor;
/// detail shading is scaled by its own depth weight.
inline std::pair<ImageBuffer, ImageBuffer> apply_shading_contrast(ImageBuffer const& base,
                                                                  ImageBuffer const& detail,
                                                                  DepthProfile const& profile,
                                                                  RetargetParams const& p)
{
    require_channels(base, 1, "apply_shading_contrast");
    require_channels(detail, 1, "apply_shading_contrast");
    require_same_size(base, detail, "apply_shading_contrast");
    if (profile_width(profile) != base.width() || profile_height(profile) != base.height())
        throw ShapeError("apply_shading_contrast: depth profile does not match the image");
    ImageBuffer out_base = base;
    ImageBuffer out_detail = detail;
    if (!p.ablation.shading_contrast)
        return {std::move(out_base), std::move(out_detail)};

    ImageBuffer const w_alpha = depth_weight(profile, p.alpha_shading);
    ImageBuffer const w_beta = depth_weight(profile, p.beta_texture);
    auto wa = w_alpha.plane();
    auto wb = w_beta.plane();
    auto sb = out_base.plane();
    auto sd = out_detail.plane();
    for (std::size_t i = 0; i < sb.size(); ++i) {
        sb[i] = 1.0 + wa[i] * (sb[i] - 1.0);
        sd[i] = wb[i] * sd[i];
    }
    return {std::move(out_base), std::move(out_detail)};
}

inline double plane_mean(ImageBuffer const& img)
{
    auto v = img.plane();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Pivot used by tone_map_albedo for this image.
inline double albedo_pivot(ImageBuffer const& albedo, RetargetParams const& p)
{
    return p.albedo_pivot.value_or(plane_mean(albedo));
}

/// p + c·(A − p) without clamping.
inline ImageBuffer stretch_about_pivot(ImageBuffer const& albedo, double pivot, double contrast)
{
    ImageBuffer out = albedo;
    for (double& a : out.samples())
        a = pivot + contrast * (a - pivot);
    return out;
}

/// Global linear contrast stretch of the albedo about a pivot, clamped to [kEpsDiv, 1].
inline ImageBuffer tone_map_albedo(ImageBuffer const& albedo, RetargetParams const& p)
{
    require_channels(albedo, 1, "tone_map_albedo");
    if (!p.ablation.albedo_contrast || p.albedo_contrast == 1.0)
        return albedo;
    ImageBuffer out = stretch_about_pivot(albedo, albedo_pivot(albedo, p), p.albedo_contrast);
    clamp_samples(out, kEpsDiv, 1.0);
    return out;
}

/// I'_y = A'_y · (S''_B + S''_D), optionally clamped to [0,1].
inline ImageBuffer recompose_luminance(ImageBuffer const& albedo, ImageBuffer const& base,
                                       ImageBuffer const& detail, bool clamp = true)
{
    require_channels(albedo, 1, "recompose");
    require_same_size(albedo, base, "recompose");
    require_same_size(albedo, detail, "recompose");
    ImageBuffer y(albedo.width(), albedo.height(), 1);
    auto a = albedo.plane();
    auto sb = base.plane();
    auto sd = detail.plane();
    auto out = y.plane();
    for (std::size_t i = 0; i < out.size(); ++i) {
        double const v = a[i] * (sb[i] + sd[i]);
        out[i] = clamp ? std::clamp(v, 0.0, 1.0) : v;
    }
    return y;
}

/// Recombines retargeted planes and reattaches colour through the chroma ratios.
inline ImageBuffer recompose(ImageBuffer const& albedo, ImageBuffer const& base,
                             ImageBuffer const& detail, ChromaRatios const& chroma)
{
    return apply_chroma(recompose_luminance(albedo, base, detail), chroma);
}

/// Every intermediate plane of one enhancement pass plus per-stage wall times.
struct EnhanceStages
{
    Decomposition decomposition;
    ImageBuffer base;                 ///< S''_B
    ImageBuffer detail;               ///< S''_D
    ImageBuffer albedo;               ///< A'_y
    ImageBuffer luminance_unclamped;  ///< I'_y before the [0,1] clamp
    ImageBuffer output;               ///< I'_rgb
    double decomposition_ms = 0.0;
    double retargeting_ms = 0.0;
    double recomposition_ms = 0.0;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
        .count();
}

} // namespace detail

inline EnhanceStages enhance_stages(ImageBuffer const& rgb, DepthProfile const& profile,
                                    DecompParams const& dp, RetargetParams const& rp,
                                    Execution exec = {})
{
    require_channels(rgb, 3, "enhance");
    if (profile_width(profile) != rgb.width() || profile_height(profile) != rgb.height())
        throw ShapeError("enhance: depth profile " + std::to_string(profile_width(profile)) + "x"
                         + std::to_string(profile_height(profile)) + " does not match image "
                         + std::to_string(rgb.width()) + "x" + std::to_string(rgb.height()));
    dp.validate();
    rp.validate();

    auto t0 = std::chrono::steady_clock::now();
    Decomposition d = decompose(rgb, dp, exec);
    double const decomposition_ms = detail::elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    ImageBuffer base = retarget_base(d.base, rp);
    ImageBuffer boosted = boost_detail(d.detail, rp);
    auto [base2, detail2] = apply_shading_contrast(base, boosted, profile, rp);
    ImageBuffer albedo = tone_map_albedo(d.albedo, rp);
    double const retargeting_ms = detail::elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    ImageBuffer lum = recompose_luminance(albedo, base2, detail2, false);
    ImageBuffer clamped = lum;
    clamp_samples(clamped, 0.0, 1.0);
    ImageBuffer output = apply_chroma(clamped, d.chroma);
    double const recomposition_ms = detail::elapsed_ms(t0);

    return EnhanceStages{std::move(d),   std::move(base2),  std::move(detail2),
                         std::move(albedo), std::move(lum), std::move(output),
                         decomposition_ms, retargeting_ms,  recomposition_ms};
}

/// Full shading/contrast retargeting of one colour image.
inline ImageBuffer enhance(ImageBuffer const& rgb, DepthProfile const& profile,
                           DecompParams const& dp, RetargetParams const& rp, Execution exec = {})
{
    return enhance_stages(rgb, profile, dp, rp, exec).output;
}

} // namespace jsm
