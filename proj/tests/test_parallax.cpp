#include <jsm/metrics.hpp>
#include <jsm/parallax.hpp>
#include <jsm/synthetic.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace jsm;
using jsm::test::random_image;
using jsm::test::TempDir;

namespace {

DepthMap ramp_map(int w, int h)
{
    ImageBuffer m(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            m(x, y) = (x + 0.5) / w;
    return DepthMap(std::move(m));
}

/// Black opaque background at nearness 0 plus a white 10x10 opaque square at nearness 1.
LayerStack square_stack(int w, int h, int x0, int y0)
{
    Layer bg{ImageBuffer(w, h, 3, 0.0), ImageBuffer(w, h, 1, 1.0), 0.0};
    Layer fg{ImageBuffer(w, h, 3, 1.0), ImageBuffer(w, h, 1, 0.0), 1.0};
    for (int y = y0; y < y0 + 10; ++y)
        for (int x = x0; x < x0 + 10; ++x)
            fg.alpha(x, y) = 1.0;
    LayerStack s;
    s.width = w;
    s.height = h;
    s.fixation_nearness = 0.0;
    s.layers = {std::move(bg), std::move(fg)};
    return s;
}

std::pair<double, double> centroid(ImageBuffer const& img)
{
    double sum = 0.0, sx = 0.0, sy = 0.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double const v = img(x, y, 0);
            sum += v;
            sx += v * x;
            sy += v * y;
        }
    return {sx / sum, sy / sum};
}

LayerStack ramp_stack(int w, int h, int layers)
{
    ParallaxParams p;
    p.layer_count = layers;
    return build_layers(random_image(w, h, 3, 21), ContinuousProfile{ramp_map(w, h)}, p);
}

} // namespace

TEST(BuildLayers, TwoLayerProfileGivesBackgroundThenForeground)
{
    auto scene = synthetic::make_test_card(40, 30);
    auto profile = two_layer_from_map(scene.depth);
    ParallaxParams p;
    p.layer_count = 7;
    auto stack = build_layers(scene.rgb, profile, p);
    ASSERT_EQ(stack.layers.size(), 2U);
    EXPECT_EQ(stack.layers[0].nearness, profile.bg_nearness);
    EXPECT_EQ(stack.layers[1].nearness, profile.fg_nearness);
    EXPECT_EQ(stack.fixation_nearness, profile.bg_nearness);
    for (double a : stack.layers[0].alpha.plane())
        EXPECT_EQ(a, 1.0);
}

TEST(BuildLayers, ConstantMapGivesOneLayerAndStillFrames)
{
    auto rgb = random_image(20, 12, 3, 3);
    auto stack = build_layers(rgb, ContinuousProfile{DepthMap(20, 12, 0.5)}, ParallaxParams{});
    ASSERT_EQ(stack.layers.size(), 1U);
    EXPECT_EQ(stack.fixation_nearness, 0.5);
    for (HeadPose pose : {HeadPose{1, 0}, HeadPose{-1, 1}, HeadPose{0.3, -0.7}})
        EXPECT_TRUE(render_frame(stack, pose, ParallaxParams{}) == rgb);
}

TEST(BuildLayers, RampQuantizesToBinMeans)
{
    auto stack = ramp_stack(64, 4, 4);
    ASSERT_EQ(stack.layers.size(), 4U);
    double const expected[] = {0.125, 0.375, 0.625, 0.875};
    for (int i = 0; i < 4; ++i)
        EXPECT_NEAR(stack.layers[i].nearness, expected[i], 1e-6);
}

TEST(BuildLayers, EmptyBinsAreDropped)
{
    ImageBuffer m(4, 1, 1, 0.0);
    m(2, 0) = 1.0;
    m(3, 0) = 1.0;
    auto stack = build_layers(random_image(4, 1, 3, 1), ContinuousProfile{DepthMap(m)},
                              ParallaxParams{});
    ASSERT_EQ(stack.layers.size(), 2U);
    EXPECT_EQ(stack.layers[0].nearness, 0.0);
    EXPECT_EQ(stack.layers[1].nearness, 1.0);
}

TEST(BuildLayers, FarLayerHolesAreFilledSmoothly)
{
    // Near region in the middle; the far layer must be extended into it with
    // values inside the range of its known colors.
    ImageBuffer m(30, 30, 1, 0.0);
    for (int y = 10; y < 20; ++y)
        for (int x = 10; x < 20; ++x)
            m(x, y) = 1.0;
    ImageBuffer rgb(30, 30, 3, 0.2);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 30; ++x)
            rgb(x, y, 1) = x / 29.0;
    auto stack = build_layers(rgb, ContinuousProfile{DepthMap(m)}, ParallaxParams{});
    auto const& far = stack.layers.front().color;
    for (int y = 10; y < 20; ++y)
        for (int x = 10; x < 20; ++x) {
            EXPECT_NEAR(far(x, y, 0), 0.2, 1e-12);
            EXPECT_GE(far(x, y, 1), 9.0 / 29.0 - 1e-9);
            EXPECT_LE(far(x, y, 1), 20.0 / 29.0 + 1e-9);
        }
}

TEST(BuildLayers, Errors)
{
    auto rgb = random_image(5, 5, 3, 1);
    EXPECT_THROW(build_layers(rgb, ContinuousProfile{DepthMap(4, 5, 0.5)}, ParallaxParams{}),
                 ShapeError);
    ParallaxParams bad;
    bad.layer_count = 0;
    EXPECT_THROW(build_layers(rgb, ContinuousProfile{DepthMap(5, 5, 0.5)}, bad), ConfigError);
    bad = ParallaxParams{};
    bad.gain_px = -1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Displacement, Examples)
{
    ParallaxParams p;
    for (double n : {0.0, 0.3, 1.0})
        EXPECT_EQ(displacement(n, {0, 0}, p, 0.2), (Offset{0, 0}));
    for (HeadPose pose : {HeadPose{1, 0}, HeadPose{-0.4, 0.9}})
        EXPECT_EQ(displacement(0.35, pose, p, 0.35), (Offset{0, 0}));
    p.gain_px = 24.0;
    EXPECT_EQ(displacement(1.0, {1, 0}, p, 0.0), (Offset{24, 0}));
}

TEST(Displacement, LinearInPose)
{
    ParallaxParams p;
    p.gain_px = 17.3;
    for (double t : {-1.0, -0.5, 0.25, 0.5, 2.0})
        for (double n : {0.0, 0.1, 0.6, 0.9}) {
            HeadPose const pose{0.375, -0.3};
            auto const base = displacement(n, pose, p, 0.1);
            auto const scaled = displacement(n, {t * pose.hx, t * pose.hy}, p, 0.1);
            EXPECT_EQ(scaled.dx, t * base.dx);
            EXPECT_EQ(scaled.dy, t * base.dy);
        }
}

TEST(Displacement, CloserLayersMoveFaster)
{
    auto stack = ramp_stack(64, 2, 8);
    ParallaxParams p;
    HeadPose const pose{0.6, 0.0};
    double prev = -1.0;
    for (auto const& l : stack.layers) {
        double const dx = displacement(l.nearness, pose, p, stack.fixation_nearness).dx;
        EXPECT_GT(dx, prev);
        prev = dx;
    }
}

TEST(RenderFrame, ZeroPoseMatchesFlattenedStack)
{
    auto scene = synthetic::make_fixture(3, 48, 32);
    auto stack = build_layers(scene.rgb, ContinuousProfile{scene.depth}, ParallaxParams{});
    auto still = render_frame(stack, {0, 0}, ParallaxParams{});
    EXPECT_LE(max_abs_diff(still, flatten(stack)), 1e-6);
    EXPECT_LE(max_abs_diff(still, scene.rgb), 1e-12);
}

TEST(RenderFrame, ForegroundSquareMovesByGain)
{
    auto stack = square_stack(60, 40, 20, 15);
    ParallaxParams p;
    p.gain_px = 10.0;
    auto const [cx0, cy0] = centroid(render_frame(stack, {0, 0}, p));
    auto const moved = render_frame(stack, {1, 0}, p);
    auto const [cx1, cy1] = centroid(moved);
    EXPECT_NEAR(cx1 - cx0, 10.0, 1e-9);
    EXPECT_NEAR(cy1 - cy0, 0.0, 1e-9);
    // Background unmoved: far from the square it is still black.
    EXPECT_EQ(moved(5, 5, 0), 0.0);
    EXPECT_EQ(moved(25, 20, 0), 0.0); // exposed region shows the background
    EXPECT_EQ(moved(35, 20, 0), 1.0);
}

TEST(RenderFrame, CoverageIsTotal)
{
    // Every layer is white where it is defined, so any uncovered pixel would be darker.
    int const w = 48;
    auto stack = ramp_stack(w, 16, 4);
    for (auto& l : stack.layers)
        l.color = ImageBuffer(w, 16, 3, 1.0);
    ParallaxParams p;
    p.gain_px = w / 4.0;
    for (HeadPose pose : {HeadPose{1, 0}, HeadPose{-1, 0}, HeadPose{0.7, -0.7}, HeadPose{0, 1}}) {
        auto frame = render_frame(stack, pose, p);
        for (double v : frame.samples())
            ASSERT_NEAR(v, 1.0, 1e-12);
    }
}

TEST(RenderTrajectory, PurityAndPeriodicity)
{
    auto scene = synthetic::make_fixture(1, 40, 30);
    auto stack = build_layers(scene.rgb, ContinuousProfile{scene.depth}, ParallaxParams{});
    ParallaxParams p;
    EXPECT_TRUE(render_trajectory(stack, {}, p).empty());

    auto zeros = render_trajectory(stack, std::vector<HeadPose>(3), p);
    EXPECT_TRUE(zeros[0] == zeros[1] && zeros[1] == zeros[2]);

    std::vector<HeadPose> poses{{0.1, 0}, {-0.5, 0.2}, {1, 1}, {0.25, -0.75}};
    auto forward = render_trajectory(stack, poses, p);
    std::vector<HeadPose> reversed(poses.rbegin(), poses.rend());
    auto backward = render_trajectory(stack, reversed, p);
    for (std::size_t i = 0; i < poses.size(); ++i)
        EXPECT_TRUE(forward[i] == backward[poses.size() - 1 - i]);

    auto cycle = autonomous_poses(32, 33);
    EXPECT_EQ(cycle[0], cycle[32]);
    auto frames = render_trajectory(stack, cycle, p);
    EXPECT_TRUE(frames[0] == frames[32]);
    EXPECT_FALSE(frames[0] == frames[8]);
    EXPECT_THROW(autonomous_poses(0, 4), ConfigError);
}

TEST(ExportStack, WritesManifestAndLayers)
{
    TempDir dir("parallax");
    auto scene = synthetic::make_test_card(32, 24);
    auto stack = build_layers(scene.rgb, two_layer_from_map(scene.depth), ParallaxParams{});
    auto manifest = export_stack(stack, ParallaxParams{}, dir.path() / "layers");
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "layers" / "layer_00.png"));
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "layers" / "layer_01.png"));
    EXPECT_FALSE(std::filesystem::exists(dir.path() / "layers" / "layer_02.png"));

    std::ifstream in(dir.path() / "layers" / "manifest.json");
    auto const onDisk = nlohmann::json::parse(in);
    EXPECT_EQ(onDisk, manifest);
    std::vector<std::string> keys;
    for (auto const& [k, v] : onDisk.items())
        keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"fixation_nearness", "gain_px", "height", "layers",
                                              "width"}));
    EXPECT_EQ(onDisk["width"], 32);
    EXPECT_EQ(onDisk["height"], 24);
    ASSERT_EQ(onDisk["layers"].size(), 2U);
    EXPECT_LT(onDisk["layers"][0]["nearness"].get<double>(),
              onDisk["layers"][1]["nearness"].get<double>());
    EXPECT_EQ(onDisk["layers"][1]["file"], "layer_01.png");
}

TEST(ExportStack, RoundTripRendersWithinQuantization)
{
    TempDir dir("parallax");
    auto scene = synthetic::make_fixture(3, 64, 48);
    ParallaxParams p;
    p.gain_px = 6.5;
    auto stack = build_layers(scene.rgb, ContinuousProfile{scene.depth}, p);
    export_stack(stack, p, dir.path());
    auto imported = import_stack(dir.path());
    EXPECT_EQ(imported.gain_px, 6.5);
    EXPECT_EQ(imported.stack.layers.size(), stack.layers.size());
    EXPECT_EQ(imported.stack.fixation_nearness, stack.fixation_nearness);
    for (HeadPose pose : {HeadPose{0, 0}, HeadPose{1, 0}, HeadPose{-0.35, 0.6}}) {
        auto a = render_frame(stack, pose, p);
        auto b = render_frame(imported.stack, pose, p);
        EXPECT_LE(max_abs_diff(a, b), 2.0 / 255.0);
    }
}

TEST(ExportStack, Errors)
{
    TempDir dir("parallax");
    auto stack = ramp_stack(8, 8, 2);
    std::ofstream(dir.path() / "blocker") << "x";
    EXPECT_THROW(export_stack(stack, ParallaxParams{}, dir.path() / "blocker" / "sub"), IoError);
    EXPECT_THROW(import_stack(dir.path() / "missing.json"), IoError);
    std::ofstream(dir.path() / "bad.json") << R"({"width": 8})";
    EXPECT_THROW(import_stack(dir.path() / "bad.json"), FormatError);
}
