#include <jsm/color.hpp>
#include <jsm/image.hpp>
#include <jsm/image_io.hpp>
#include <jsm/resample.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

using namespace jsm;
using jsm::test::random_image;
using jsm::test::TempDir;

namespace {

void write_bytes(std::filesystem::path const& path, std::string const& bytes)
{
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ImageBuffer rgb_pixel(double r, double g, double b)
{
    return ImageBuffer(1, 1, 3, std::vector<double>{r, g, b});
}

} // namespace

TEST(ImageBuffer, RejectsBadShapesAndNonFiniteData)
{
    EXPECT_THROW(ImageBuffer(0, 3, 1), ShapeError);
    EXPECT_THROW(ImageBuffer(2, 2, 2), ShapeError);
    EXPECT_THROW(ImageBuffer(2, 1, 1, std::vector<double>{0.0}), ShapeError);
    EXPECT_THROW(ImageBuffer(1, 1, 1, std::vector<double>{std::nan("")}), DataError);
    EXPECT_THROW(ImageBuffer(1, 1, 1, std::vector<double>{std::numeric_limits<double>::infinity()}),
                 DataError);
    ImageBuffer img(3, 2, 3, 0.25);
    EXPECT_EQ(img.sample_count(), 18u);
}

TEST(ImageBuffer, PlanarLayout)
{
    ImageBuffer img(2, 2, 3);
    img(1, 0, 2) = 7.0;
    EXPECT_EQ(img.samples()[2 * 4 + 1], 7.0);
    EXPECT_EQ(img.plane(2)[1], 7.0);
}

TEST(LoadImage, PpmEndpointsMapToUnitRange)
{
    TempDir dir("io");
    write_bytes(dir / "two.ppm", std::string("P6\n2 1\n255\n") + std::string("\xff\xff\xff\0\0\0", 6));
    ImageBuffer img = load_image(dir / "two.ppm");
    ASSERT_EQ(img.channels(), 3);
    ASSERT_EQ(img.width(), 2);
    for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(img(0, 0, c), 1.0);
        EXPECT_EQ(img(1, 0, c), 0.0);
    }
}

TEST(LoadImage, GrayPngIsLinearized)
{
    TempDir dir("io");
    detail::write_png_codes(dir / "g.png", 1, 1, 1, 8, {128});
    ImageBuffer img = load_image(dir / "g.png");
    ASSERT_EQ(img.channels(), 1);
    EXPECT_NEAR(img(0, 0), 0.2158, 1e-3);
}

TEST(LoadImage, EmptyAndMissingFilesAreIoErrors)
{
    TempDir dir("io");
    write_bytes(dir / "empty.png", "");
    EXPECT_THROW(load_image(dir / "empty.png"), IoError);
    EXPECT_THROW(load_image(dir / "missing.png"), IoError);
}

TEST(LoadImage, UnsupportedFormatIsNamed)
{
    TempDir dir("io");
    write_bytes(dir / "x.jpg", std::string("\xff\xd8\xff\xe0 not really", 15));
    try {
        load_image(dir / "x.jpg");
        FAIL() << "expected FormatError";
    }
    catch (FormatError const& e) {
        EXPECT_NE(std::string(e.what()).find("JPEG"), std::string::npos);
    }
}

TEST(LoadImage, CorruptPngIsFormatError)
{
    TempDir dir("io");
    write_bytes(dir / "bad.png", std::string("\x89PNG\r\n\x1a\n\0\0\0\rIHDR", 16));
    EXPECT_THROW(load_image(dir / "bad.png"), FormatError);
}

TEST(LoadImage, SixteenBitPgm)
{
    TempDir dir("io");
    write_bytes(dir / "d.pgm", std::string("P5\n# depth\n2 1\n65535\n") + std::string("\xff\xff\x80\x00", 4));
    RawImage raw = read_raw(dir / "d.pgm");
    EXPECT_EQ(raw.max_code, 65535);
    EXPECT_EQ(raw.at(0, 0), 65535.0);
    EXPECT_EQ(raw.at(1, 0), 32768.0);
}

TEST(Luminance, Bt709Weights)
{
    EXPECT_DOUBLE_EQ(luminance_of(rgb_pixel(1, 1, 1))(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(luminance_of(rgb_pixel(0, 0, 0))(0, 0), 0.0);
    EXPECT_NEAR(luminance_of(rgb_pixel(1, 0, 0))(0, 0), 0.2126, 1e-15);
    EXPECT_THROW(luminance_of(ImageBuffer(2, 2, 1)), ShapeError);
}

TEST(Luminance, IsLinear)
{
    for (std::uint32_t seed = 0; seed < 20; ++seed) {
        auto a = random_image(9, 7, 3, seed);
        auto b = random_image(9, 7, 3, seed + 100);
        double const wa = 0.3 + 0.02 * seed, wb = 0.25;
        ImageBuffer mix(9, 7, 3);
        for (std::size_t i = 0; i < mix.sample_count(); ++i)
            mix.samples()[i] = wa * a.samples()[i] + wb * b.samples()[i];
        auto ym = luminance_of(mix);
        auto ya = luminance_of(a);
        auto yb = luminance_of(b);
        for (std::size_t i = 0; i < ym.pixel_count(); ++i)
            EXPECT_NEAR(ym.plane()[i], wa * ya.plane()[i] + wb * yb.plane()[i], 1e-6);
    }
}

TEST(Chroma, Examples)
{
    auto gray = rgb_pixel(0.5, 0.5, 0.5);
    auto r = chroma_of(gray, luminance_of(gray));
    for (int c = 0; c < 3; ++c)
        EXPECT_NEAR(r.plane(c)[0], 1.0, 1e-12);

    auto black = rgb_pixel(0, 0, 0);
    auto rb = chroma_of(black, luminance_of(black));
    for (int c = 0; c < 3; ++c)
        EXPECT_EQ(rb.plane(c)[0], 1.0);

    auto red = rgb_pixel(1, 0, 0);
    auto rr = chroma_of(red, luminance_of(red));
    EXPECT_NEAR(rr.plane(0)[0], 4.7037, 1e-3);
    EXPECT_EQ(rr.plane(1)[0], 0.0);
    EXPECT_EQ(rr.plane(2)[0], 0.0);

    EXPECT_THROW(chroma_of(ImageBuffer(2, 2, 3), ImageBuffer(3, 2, 1)), ShapeError);
}

TEST(Chroma, RatiosTimesLuminanceReconstruct)
{
    for (std::uint32_t seed = 0; seed < 25; ++seed) {
        auto img = random_image(11, 5, 3, seed);
        auto y = luminance_of(img);
        auto ratios = chroma_of(img, y);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < img.pixel_count(); ++i) {
                double const r = ratios.plane(c)[i];
                if (y.plane()[i] >= kEpsDiv && r <= kRatioMax) {
                    ASSERT_NEAR(r * y.plane()[i], img.plane(c)[i], 1e-6);
                }
                ASSERT_GE(r, 0.0);
                ASSERT_LE(r, kRatioMax);
            }
    }
}

TEST(SaveImage, ClampsOutOfRangeValues)
{
    TempDir dir("io");
    ImageBuffer img(2, 1, 1, std::vector<double>{1.5, -0.2});
    save_image(img, dir / "c.png");
    auto back = load_image(dir / "c.png");
    EXPECT_EQ(back(0, 0), 1.0);
    EXPECT_EQ(back(1, 0), 0.0);
}

TEST(SaveImage, SixteenBitLinearRoundTripWithinQuantization)
{
    TempDir dir("io");
    auto img = random_image(32, 17, 3, 5);
    save_image(img, dir / "r.png", 16, Transfer::linear);
    auto back = load_image(dir / "r.png", Transfer::linear);
    double const bound = 1.0 / 65535.0 + 1e-6;
    for (std::size_t i = 0; i < img.sample_count(); ++i)
        ASSERT_LE(std::abs(back.samples()[i] - img.samples()[i]), bound);
}

TEST(SaveImage, SixteenBitSrgbRoundTripWithinSlopeBound)
{
    // The sRGB decode slope peaks at 2.4/1.055 (at 1.0), scaling half a code step.
    TempDir dir("io");
    auto img = random_image(32, 17, 3, 6);
    save_image(img, dir / "r.png", 16);
    auto back = load_image(dir / "r.png");
    double const bound = (2.4 / 1.055) * 0.5 / 65535.0 + 1e-9;
    for (std::size_t i = 0; i < img.sample_count(); ++i)
        ASSERT_LE(std::abs(back.samples()[i] - img.samples()[i]), bound);
}

TEST(SaveImage, SecondRoundTripIsBitIdentical)
{
    TempDir dir("io");
    for (Transfer t : {Transfer::srgb, Transfer::linear}) {
        auto img = random_image(20, 9, 3, 8);
        save_image(img, dir / "a.png", 16, t);
        auto once = load_image(dir / "a.png", t);
        save_image(once, dir / "b.png", 16, t);
        auto twice = load_image(dir / "b.png", t);
        EXPECT_TRUE(once == twice);
    }
}

TEST(SaveImage, PnmOutputByExtension)
{
    TempDir dir("io");
    auto img = random_image(5, 4, 3, 2);
    save_image(img, dir / "o.ppm", 16, Transfer::linear);
    auto back = load_image(dir / "o.ppm", Transfer::linear);
    for (std::size_t i = 0; i < img.sample_count(); ++i)
        ASSERT_NEAR(back.samples()[i], img.samples()[i], 0.5 / 65535.0 + 1e-12);
}

TEST(SaveImage, UnwritablePathIsIoError)
{
    EXPECT_THROW(save_image(ImageBuffer(1, 1, 1), "/nonexistent_dir/x/y.png"), IoError);
}

TEST(Pfm, BothEndiannessesAndRowOrder)
{
    TempDir dir("io");
    std::vector<float> values{1.0f, 2.0f, 3.0f, std::numeric_limits<float>::infinity(), 5.0f, 6.0f};
    for (bool little : {true, false}) {
        auto path = dir / (little ? "le.pfm" : "be.pfm");
        save_pfm(path, 3, 2, values, little);
        RawImage raw = read_raw(path);
        ASSERT_EQ(raw.format, FileFormat::pfm);
        ASSERT_EQ(raw.width, 3);
        ASSERT_EQ(raw.height, 2);
        EXPECT_EQ(raw.at(0, 0), 1.0);
        EXPECT_EQ(raw.at(2, 0), 3.0);
        EXPECT_TRUE(std::isinf(raw.at(0, 1)));
        EXPECT_EQ(raw.at(2, 1), 6.0);
    }
    EXPECT_THROW(load_image(dir / "le.pfm"), FormatError);
}

TEST(Resize, SameSizeIsExactCopyAndConstantsArePreserved)
{
    auto img = random_image(6, 5, 3, 1);
    EXPECT_TRUE(resize_bilinear(img, 6, 5) == img);
    ImageBuffer flat(7, 3, 1, 0.1);
    auto big = resize_bilinear(flat, 19, 11);
    for (double v : big.samples())
        EXPECT_EQ(v, 0.1);
}
