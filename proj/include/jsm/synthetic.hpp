#pragma once

#include <jsm/depth.hpp>
#include <jsm/image.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace jsm::synthetic {

/// A generated colour image with known depth and foreground region.
struct Scene
{
    std::string name;
    ImageBuffer rgb;
    DepthMap depth;
    std::vector<std::uint8_t> foreground; ///< 1 where nearness >= 0.5
};

inline constexpr int kFixtureCount = 10;

namespace detail {

/// Smooth value noise in [0,1]: bilinear interpolation of a random lattice.
class ValueNoise
{
public:
    ValueNoise(int width, int height, double cell, std::uint32_t seed)
    : _cell(cell), _gw(static_cast<int>(width / cell) + 2), _gh(static_cast<int>(height / cell) + 2)
    {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        _lattice.resize(static_cast<std::size_t>(_gw) * _gh);
        for (double& v : _lattice)
            v = u(rng);
    }

    double operator()(double x, double y) const
    {
        double const gx = x / _cell;
        double const gy = y / _cell;
        int const x0 = std::clamp(static_cast<int>(gx), 0, _gw - 2);
        int const y0 = std::clamp(static_cast<int>(gy), 0, _gh - 2);
        double const tx = smooth(gx - x0);
        double const ty = smooth(gy - y0);
        auto at = [&](int x, int y) { return _lattice[static_cast<std::size_t>(y) * _gw + x]; };
        double const top = at(x0, y0) + tx * (at(x0 + 1, y0) - at(x0, y0));
        double const bot = at(x0, y0 + 1) + tx * (at(x0 + 1, y0 + 1) - at(x0, y0 + 1));
        return top + ty * (bot - top);
    }

private:
    static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

    double _cell;
    int _gw;
    int _gh;
    std::vector<double> _lattice;
};

inline Scene finish(std::string name, ImageBuffer rgb, ImageBuffer nearness)
{
    clamp_samples(rgb, 0.0, 1.0);
    clamp_samples(nearness, 0.0, 1.0);
    std::vector<std::uint8_t> fg(nearness.pixel_count());
    auto n = nearness.plane();
    for (std::size_t i = 0; i < fg.size(); ++i)
        fg[i] = n[i] >= 0.5 ? 1 : 0;
    return Scene{std::move(name), std::move(rgb), DepthMap(std::move(nearness)), std::move(fg)};
}

inline void put(ImageBuffer& img, int x, int y, std::array<double, 3> albedo, double shading)
{
    for (int c = 0; c < 3; ++c)
        img(x, y, c) = albedo[c] * shading;
}

} // namespace detail

/// Bimodal-depth card: a bright foreground rectangle (nearness 1) over a darker
/// background (nearness 0). Both carry fine low-amplitude shading texture.
inline Scene make_test_card(int width, int height, std::uint32_t seed = 1)
{
    ImageBuffer rgb(width, height, 3);
    ImageBuffer nearness(width, height, 1);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    detail::ValueNoise soft(width, height, std::max(4.0, width / 6.0), seed + 17);
    int const x0 = width / 4, x1 = 3 * width / 4;
    int const y0 = height / 4, y1 = 3 * height / 4;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            bool const fg = x >= x0 && x < x1 && y >= y0 && y < y1;
            double const texture = 1.0 + 0.05 * u(rng);
            double const light = 0.9 + 0.2 * soft(x, y);
            std::array<double, 3> const albedo = fg ? std::array{0.75, 0.68, 0.6}
                                                    : std::array{0.26, 0.3, 0.34};
            detail::put(rgb, x, y, albedo, light * texture);
            nearness(x, y) = fg ? 1.0 : 0.0;
        }
    return detail::finish("test_card", std::move(rgb), std::move(nearness));
}

/// One of kFixtureCount deterministic scenes of varied content and depth layout.
inline Scene make_fixture(int index, int width, int height)
{
    std::uint32_t const seed = 1000u + static_cast<std::uint32_t>(index);
    if (index == 0)
        return make_test_card(width, height, seed);

    ImageBuffer rgb(width, height, 3);
    ImageBuffer nearness(width, height, 1);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    detail::ValueNoise coarse(width, height, std::max(4.0, width / 5.0), seed + 1);
    detail::ValueNoise fine(width, height, 3.0, seed + 2);
    double const cx = width * 0.5, cy = height * 0.5;
    double const radius = std::min(width, height) * 0.3;
    std::string name;

    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double const fy = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
            double const fx = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
            double const grain = 1.0 + 0.04 * u(rng);
            std::array<double, 3> albedo{0.5, 0.5, 0.5};
            double shading = 1.0;
            double near = 0.0;
            switch (index) {
            case 1: { // lit sphere in front of a mottled wall
                name = "sphere";
                double const dx = (x - cx) / radius, dy = (y - cy) / radius;
                double const r2 = dx * dx + dy * dy;
                if (r2 < 1.0) {
                    double const nz = std::sqrt(1.0 - r2);
                    shading = 0.25 + 0.75 * std::max(0.0, -0.4 * dx - 0.5 * dy + 0.77 * nz);
                    albedo = {0.8, 0.45, 0.35};
                    near = 0.6 + 0.4 * nz;
                }
                else {
                    albedo = {0.35 + 0.2 * coarse(x, y), 0.4, 0.45};
                    shading = 0.85;
                    near = 0.1;
                }
                break;
            }
            case 2: { // checker floor receding towards the top
                name = "checker_floor";
                int const cell = std::max(2, width / 12);
                bool const dark = ((x / cell) + (y / cell)) % 2 == 0;
                albedo = dark ? std::array{0.2, 0.22, 0.3} : std::array{0.7, 0.66, 0.55};
                shading = 0.6 + 0.4 * fy;
                near = fy;
                break;
            }
            case 3: { // noise terrain
                name = "noise_terrain";
                double const n = coarse(x, y);
                albedo = {0.3 + 0.4 * n, 0.35 + 0.3 * fine(x, y), 0.25 + 0.2 * n};
                shading = 0.7 + 0.5 * fine(x * 1.7, y * 1.3);
                near = 0.2 + 0.8 * fy * n;
                break;
            }
            case 4: { // colour stripes, depth increasing left to right
                name = "stripes";
                int const band = (x * 6) / std::max(1, width);
                static constexpr std::array<std::array<double, 3>, 6> palette{{
                    {0.8, 0.2, 0.2}, {0.2, 0.7, 0.2}, {0.2, 0.3, 0.8},
                    {0.8, 0.7, 0.2}, {0.6, 0.2, 0.7}, {0.3, 0.7, 0.7},
                }};
                albedo = palette[static_cast<std::size_t>(band)];
                shading = 0.75 + 0.25 * std::sin(fy * 3.14159);
                near = fx;
                break;
            }
            case 5: { // two disks at different depths over a gradient
                name = "two_disks";
                double const d1 = std::hypot(x - width * 0.35, y - height * 0.45);
                double const d2 = std::hypot(x - width * 0.65, y - height * 0.55);
                double const rr = std::min(width, height) * 0.2;
                albedo = {0.3 + 0.3 * fx, 0.35, 0.6 - 0.3 * fx};
                near = 0.05;
                if (d1 < rr) {
                    albedo = {0.75, 0.72, 0.3};
                    shading = 1.0 - 0.4 * d1 / rr;
                    near = 0.55;
                }
                if (d2 < rr) {
                    albedo = {0.3, 0.75, 0.5};
                    shading = 1.0 - 0.4 * d2 / rr;
                    near = 0.95;
                }
                break;
            }
            case 6: { // achromatic low-contrast texture
                name = "gray_texture";
                double const g = 0.4 + 0.2 * coarse(x, y);
                albedo = {g, g, g};
                shading = 0.8 + 0.3 * fine(x, y);
                near = coarse(y, x);
                break;
            }
            case 7: { // saturated primary blocks
                name = "primaries";
                int const qx = x * 2 / std::max(1, width), qy = y * 2 / std::max(1, height);
                static constexpr std::array<std::array<double, 3>, 4> blocks{{
                    {0.85, 0.05, 0.05}, {0.05, 0.8, 0.05}, {0.05, 0.1, 0.9}, {0.8, 0.8, 0.8},
                }};
                albedo = blocks[static_cast<std::size_t>(qy * 2 + qx)];
                shading = 0.6 + 0.4 * coarse(x, y);
                near = (qy * 2 + qx) / 3.0;
                break;
            }
            case 8: { // dim scene
                name = "dim";
                double const g = 0.08 + 0.1 * coarse(x, y);
                albedo = {g * 1.2, g, g * 0.8};
                shading = 0.7 + 0.5 * fine(x, y);
                near = 1.0 - fy;
                break;
            }
            default: { // fine checker on a shaded dome
                name = "fine_checker";
                bool const dark = ((x / 2) + (y / 2)) % 2 == 0;
                albedo = dark ? std::array{0.3, 0.3, 0.35} : std::array{0.55, 0.5, 0.45};
                double const dx = (x - cx) / (radius * 1.6), dy = (y - cy) / (radius * 1.6);
                shading = 0.5 + 0.5 * std::max(0.0, 1.0 - dx * dx - dy * dy);
                near = std::clamp(1.0 - std::sqrt(dx * dx + dy * dy), 0.0, 1.0);
                break;
            }
            }
            detail::put(rgb, x, y, albedo, shading * grain);
            nearness(x, y) = near;
        }
    return detail::finish(std::move(name), std::move(rgb), std::move(nearness));
}

} // namespace jsm::synthetic
