#include <jsm/metrics.hpp>
#include <jsm/retargeting.hpp>
#include <jsm/synthetic.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace jsm;
using jsm::test::random_image;

namespace {

DepthProfile flat_profile(int w, int h, double d)
{
    return ContinuousProfile{DepthMap(w, h, d)};
}

ImageBuffer one(double v) { return ImageBuffer(1, 1, 1, v); }

} // namespace

TEST(RetargetBase, Examples)
{
    RetargetParams p;
    p.gamma = 1.0;
    p.trunc_lo = 0.0;
    p.trunc_hi = kShadingMax;
    auto s = random_image(8, 8, 1, 1, 0.0, kShadingMax);
    EXPECT_TRUE(retarget_base(s, p) == s);

    p.gamma = 0.5;
    p.trunc_hi = 2.0;
    EXPECT_DOUBLE_EQ(retarget_base(one(0.5), p)(0, 0), 1.0);

    p.gamma = 1.0;
    EXPECT_EQ(retarget_base(one(3.0), p)(0, 0), 2.0);

    RetargetParams off;
    off.ablation.base_shading = false;
    EXPECT_TRUE(retarget_base(s, off) == s);
}

TEST(RetargetBase, NondecreasingOnTruncationInterval)
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> gamma(0.05, 4.0);
    for (int trial = 0; trial < 30; ++trial) {
        RetargetParams p;
        p.gamma = gamma(rng);
        ImageBuffer s(200, 1, 1);
        for (int x = 0; x < 200; ++x)
            s(x, 0) = p.trunc_lo + (p.trunc_hi - p.trunc_lo) * x / 199.0;
        auto out = retarget_base(s, p);
        for (int x = 1; x < 200; ++x)
            ASSERT_LE(out(x - 1, 0), out(x, 0));
        EXPECT_DOUBLE_EQ(out(199, 0), p.trunc_hi);
    }
}

TEST(BoostDetail, Examples)
{
    auto d = random_image(6, 6, 1, 2, -0.3, 0.3);
    RetargetParams p;
    p.detail_gain = 1.0;
    EXPECT_TRUE(boost_detail(d, p) == d);
    p.detail_gain = 2.0;
    EXPECT_DOUBLE_EQ(boost_detail(one(-0.1), p)(0, 0), -0.2);
    auto zeros = boost_detail(ImageBuffer(3, 3, 1), p);
    for (double v : zeros.plane())
        EXPECT_EQ(v, 0.0);
    p.ablation.detail_shading = false;
    EXPECT_TRUE(boost_detail(d, p) == d);
}

TEST(BoostDetail, VarianceScalesWithGainSquared)
{
    for (double gain : {0.0, 0.5, 1.8, 3.0}) {
        auto d = random_image(30, 20, 1, 9, -0.2, 0.2);
        RetargetParams p;
        p.detail_gain = gain;
        double const before = masked_variance(d.plane());
        double const after = masked_variance(boost_detail(d, p).plane());
        EXPECT_NEAR(after, gain * gain * before, 1e-12 * before);
    }
}

TEST(DepthWeight, Law)
{
    for (double d : {0.0, 0.2, 0.5, 1.0}) {
        auto w = depth_weight(flat_profile(2, 2, d), 0.0);
        for (double v : w.plane())
            EXPECT_EQ(v, 1.0);
    }
    for (double gain : {0.1, 0.3, 0.9}) {
        auto w = depth_weight(flat_profile(2, 2, 0.5), gain);
        for (double v : w.plane())
            EXPECT_EQ(v, 1.0);
    }
    EXPECT_DOUBLE_EQ(depth_weight(flat_profile(1, 1, 1.0), 0.3)(0, 0), 1.3);
    EXPECT_DOUBLE_EQ(depth_weight(flat_profile(1, 1, 0.0), 0.3)(0, 0), 0.7);
    EXPECT_THROW(depth_weight(flat_profile(1, 1, 0.0), 1.0), ConfigError);
}

TEST(DepthWeight, TwoLayerUsesPerSideNearness)
{
    TwoLayerProfile two;
    two.width = 2;
    two.height = 1;
    two.mask = {0, 1};
    two.fg_nearness = 0.8;
    two.bg_nearness = 0.1;
    auto w = depth_weight(two, 0.5);
    EXPECT_DOUBLE_EQ(w(0, 0), 1.0 + 0.5 * (0.2 - 1.0));
    EXPECT_DOUBLE_EQ(w(1, 0), 1.0 + 0.5 * (1.6 - 1.0));
}

TEST(ShadingContrast, Examples)
{
    auto base = random_image(5, 4, 1, 3, 0.5, 2.0);
    auto detail = random_image(5, 4, 1, 4, -0.1, 0.1);
    auto depth = flat_profile(5, 4, 0.9);

    RetargetParams p;
    p.alpha_shading = 0.0;
    p.beta_texture = 0.0;
    auto [b0, d0] = apply_shading_contrast(base, detail, depth, p);
    EXPECT_NEAR(max_abs_diff(b0, base), 0.0, 1e-15);
    EXPECT_TRUE(d0 == detail);

    RetargetParams q;
    auto [b1, d1] = apply_shading_contrast(ImageBuffer(5, 4, 1, 1.0), detail, depth, q);
    for (double v : b1.plane())
        EXPECT_EQ(v, 1.0);

    q.alpha_shading = 0.3;
    auto [b2, d2] = apply_shading_contrast(one(1.5), one(0.0), flat_profile(1, 1, 1.0), q);
    EXPECT_DOUBLE_EQ(b2(0, 0), 1.65);

    q.ablation.shading_contrast = false;
    auto [b3, d3] = apply_shading_contrast(base, detail, depth, q);
    EXPECT_TRUE(b3 == base);
    EXPECT_TRUE(d3 == detail);

    EXPECT_THROW(apply_shading_contrast(base, detail, flat_profile(4, 4, 0.5), RetargetParams{}),
                 ShapeError);
}

TEST(ShadingContrast, MidDepthIsNeutralForAnyGains)
{
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> gain(0.0, 0.99);
    auto base = random_image(7, 7, 1, 5, 0.2, 3.0);
    auto detail = random_image(7, 7, 1, 6, -0.3, 0.3);
    for (int trial = 0; trial < 20; ++trial) {
        RetargetParams p;
        p.alpha_shading = gain(rng);
        p.beta_texture = gain(rng);
        auto [b, d] = apply_shading_contrast(base, detail, flat_profile(7, 7, 0.5), p);
        EXPECT_LE(max_abs_diff(b, base), 1e-15);
        EXPECT_TRUE(d == detail);
    }
}

TEST(ToneMapAlbedo, Examples)
{
    auto a = random_image(6, 6, 1, 7, 0.1, 0.9);
    RetargetParams p;
    p.albedo_contrast = 1.0;
    EXPECT_TRUE(tone_map_albedo(a, p) == a);

    p.albedo_contrast = 1.25;
    p.albedo_pivot = 0.5;
    EXPECT_DOUBLE_EQ(tone_map_albedo(one(0.9), p)(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(tone_map_albedo(one(0.5), p)(0, 0), 0.5);

    p.albedo_pivot.reset();
    auto flat = tone_map_albedo(ImageBuffer(4, 4, 1, 0.37), p);
    for (double v : flat.plane())
        EXPECT_DOUBLE_EQ(v, 0.37);

    p.ablation.albedo_contrast = false;
    EXPECT_TRUE(tone_map_albedo(a, p) == a);
}

TEST(ToneMapAlbedo, PreClampContrastScalesByGain)
{
    for (double c : {0.5, 1.25, 2.0}) {
        auto a = random_image(25, 25, 1, 11, 0.1, 0.9);
        RetargetParams p;
        p.albedo_contrast = c;
        auto out = stretch_about_pivot(a, albedo_pivot(a, p), c);
        EXPECT_NEAR(rms_contrast(out), c * rms_contrast(a), 1e-12);
    }
}

TEST(Recompose, Examples)
{
    auto gray = recompose(one(0.5), one(1.0), one(0.0), ChromaRatios::neutral(1, 1));
    for (int c = 0; c < 3; ++c)
        EXPECT_EQ(gray(0, 0, c), 0.5);
    auto neg = recompose(one(0.5), one(0.2), one(-0.5), ChromaRatios::neutral(1, 1));
    for (int c = 0; c < 3; ++c)
        EXPECT_EQ(neg(0, 0, c), 0.0);
    EXPECT_THROW(recompose(one(0.5), ImageBuffer(2, 1, 1), one(0.0), ChromaRatios::neutral(1, 1)),
                 ShapeError);
}

TEST(Enhance, IdentityParamsReproduceInput)
{
    for (int k = 0; k < synthetic::kFixtureCount; ++k) {
        auto scene = synthetic::make_fixture(k, 80, 60);
        auto out = enhance(scene.rgb, ContinuousProfile{scene.depth}, DecompParams{},
                           RetargetParams::identity());
        EXPECT_GE(psnr(scene.rgb, out), 60.0) << scene.name;
    }
}

TEST(Enhance, TestCardEmphasizesForegroundTexture)
{
    auto scene = synthetic::make_test_card(128, 96);
    auto profile = two_layer_from_map(scene.depth);
    auto s = enhance_stages(scene.rgb, profile, DecompParams{}, RetargetParams{});
    auto const& d = s.decomposition;
    auto bg = profile.mask;
    for (auto& m : bg)
        m = !m;
    EXPECT_GT(detail_variance(s.albedo, s.detail, profile.mask),
              detail_variance(d.albedo, d.detail, profile.mask));
    EXPECT_LE(detail_variance(s.albedo, s.detail, bg), detail_variance(d.albedo, d.detail, bg));
}

TEST(Enhance, DefaultsRaiseGlobalContrast)
{
    for (int k = 0; k < synthetic::kFixtureCount; ++k) {
        auto scene = synthetic::make_fixture(k, 80, 60);
        auto s = enhance_stages(scene.rgb, ContinuousProfile{scene.depth}, DecompParams{},
                                RetargetParams{});
        EXPECT_GT(rms_contrast(s.luminance_unclamped), rms_contrast(s.decomposition.luminance))
            << scene.name;
    }
}

TEST(Enhance, DeterministicAcrossRunsAndThreads)
{
    auto scene = synthetic::make_fixture(1, 90, 70);
    DepthProfile const profile = ContinuousProfile{scene.depth};
    auto a = enhance(scene.rgb, profile, DecompParams{}, RetargetParams{}, Execution{1});
    auto b = enhance(scene.rgb, profile, DecompParams{}, RetargetParams{}, Execution{1});
    auto c = enhance(scene.rgb, profile, DecompParams{}, RetargetParams{}, Execution{4});
    EXPECT_TRUE(a == b);
    EXPECT_TRUE(a == c);
}

TEST(Enhance, RejectsMismatchedProfileAndBadParams)
{
    auto scene = synthetic::make_fixture(2, 20, 10);
    EXPECT_THROW(enhance(scene.rgb, flat_profile(10, 10, 0.5), DecompParams{}, RetargetParams{}),
                 ShapeError);
    RetargetParams bad;
    bad.trunc_lo = 3.0;
    EXPECT_THROW(enhance(scene.rgb, flat_profile(20, 10, 0.5), DecompParams{}, bad), ConfigError);
}
