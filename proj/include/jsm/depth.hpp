#pragma once

#include <jsm/error.hpp>
#include <jsm/image.hpp>
#include <jsm/image_io.hpp>
#include <jsm/resample.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace jsm {

/// Per-pixel nearness in [0,1]; 1 is closest to the viewer.
class DepthMap
{
public:
    explicit DepthMap(ImageBuffer nearness) : _nearness(std::move(nearness))
    {
        require_channels(_nearness, 1, "DepthMap");
        for (double v : _nearness.samples())
            if (!(v >= 0.0 && v <= 1.0))
                throw DataError("depth nearness outside [0,1]");
    }

    DepthMap(int width, int height, double fill) : DepthMap(ImageBuffer(width, height, 1, fill)) {}

    int width() const noexcept { return _nearness.width(); }
    int height() const noexcept { return _nearness.height(); }
    double operator()(int x, int y) const noexcept { return _nearness(x, y); }
    std::span<double const> values() const noexcept { return _nearness.plane(); }
    ImageBuffer const& plane() const noexcept { return _nearness; }

private:
    ImageBuffer _nearness;
};

/// Binary foreground/background split with one representative nearness per side.
struct TwoLayerProfile
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask; ///< 1 = foreground
    double fg_nearness = 1.0;
    double bg_nearness = 0.0;
    double threshold = 0.5; ///< nearness at which the split was made
};

struct ContinuousProfile
{
    DepthMap map;
};

using DepthProfile = std::variant<TwoLayerProfile, ContinuousProfile>;

enum class DepthKind
{
    disparity, ///< larger raw value = nearer
    depth,     ///< larger raw value = farther
};

enum class DepthPrior
{
    vertical_gradient,
};

inline int profile_width(DepthProfile const& p)
{
    return std::visit([](auto const& v) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, TwoLayerProfile>)
            return v.width;
        else
            return v.map.width();
    }, p);
}

inline int profile_height(DepthProfile const& p)
{
    return std::visit([](auto const& v) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, TwoLayerProfile>)
            return v.height;
        else
            return v.map.height();
    }, p);
}

/// Nearness value each pixel contributes to depth weighting: the map itself for
/// continuous profiles, the per-side mean for two-layer ones.
inline ImageBuffer effective_nearness(DepthProfile const& profile)
{
    if (auto const* two = std::get_if<TwoLayerProfile>(&profile)) {
        ImageBuffer d(two->width, two->height, 1);
        auto out = d.plane();
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = two->mask[i] ? two->fg_nearness : two->bg_nearness;
        return d;
    }
    return std::get<ContinuousProfile>(profile).map.plane();
}

namespace detail {

inline bool valid_raw_depth(double v) noexcept
{
    return std::isfinite(v) && v > 0.0;
}

/// Multi-source breadth-first fill of invalid samples from their nearest valid
/// neighbour (4-connectivity). Sources enter the queue in row-major order and
/// neighbours are visited up, left, right, down, so ties resolve deterministically.
inline void fill_invalid(std::vector<double>& values, std::vector<std::uint8_t>& valid, int width,
                         int height)
{
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (valid[i])
            queue.push_back(i);
    if (queue.empty())
        throw DataError("depth map contains no valid samples");
    while (!queue.empty()) {
        std::size_t const i = queue.front();
        queue.pop_front();
        int const x = static_cast<int>(i % width);
        int const y = static_cast<int>(i / width);
        std::array<std::array<int, 2>, 4> const nbrs{{{x, y - 1}, {x - 1, y}, {x + 1, y}, {x, y + 1}}};
        for (auto [nx, ny] : nbrs) {
            if (nx < 0 || ny < 0 || nx >= width || ny >= height)
                continue;
            std::size_t const j = static_cast<std::size_t>(ny) * width + nx;
            if (valid[j])
                continue;
            valid[j] = 1;
            values[j] = values[i];
            queue.push_back(j);
        }
    }
}

} // namespace detail

/// Converts raw depth or disparity samples to a normalized nearness map.
///
/// Depth is inverted (1/z) before normalization. Invalid samples (non-finite
/// or non-positive) are filled from the nearest valid neighbour. A constant
/// map normalizes to 0.5 everywhere.
inline DepthMap depth_from_samples(int width, int height, std::vector<double> raw, DepthKind kind)
{
    if (width < 1 || height < 1 || raw.size() != static_cast<std::size_t>(width) * height)
        throw ShapeError("depth samples do not match " + std::to_string(width) + "x"
                         + std::to_string(height));
    std::vector<std::uint8_t> valid(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        valid[i] = detail::valid_raw_depth(raw[i]) ? 1 : 0;
        if (valid[i] && kind == DepthKind::depth)
            raw[i] = 1.0 / raw[i];
    }
    detail::fill_invalid(raw, valid, width, height);

    auto [lo_it, hi_it] = std::ranges::minmax_element(raw);
    double const lo = *lo_it;
    double const hi = *hi_it;
    ImageBuffer nearness(width, height, 1, 0.5);
    if (hi > lo) {
        auto out = nearness.plane();
        for (std::size_t i = 0; i < raw.size(); ++i)
            out[i] = std::clamp((raw[i] - lo) / (hi - lo), 0.0, 1.0);
    }
    return DepthMap(std::move(nearness));
}

/// Loads a PFM or 16-bit PNG (or PGM) depth/disparity file.
inline DepthMap depth_from_file(std::filesystem::path const& path, DepthKind kind)
{
    RawImage raw = read_raw(path);
    if (raw.channels != 1)
        throw FormatError("depth file '" + path.string() + "' must be single-channel, has "
                          + std::to_string(raw.channels) + " channels");
    try {
        return depth_from_samples(raw.width, raw.height, std::move(raw.values), kind);
    }
    catch (DataError const& e) {
        throw DataError("'" + path.string() + "': " + e.what());
    }
}

/// Ground-plane prior: the bottom row is nearest.
inline DepthMap depth_from_prior(int width, int height,
                                 DepthPrior prior = DepthPrior::vertical_gradient)
{
    (void)prior;
    ImageBuffer nearness(width, height, 1);
    for (int y = 0; y < height; ++y) {
        double const v = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
        for (int x = 0; x < width; ++x)
            nearness(x, y) = v;
    }
    return DepthMap(std::move(nearness));
}

inline constexpr int kOtsuBins = 256;

inline int nearness_bin(double v) noexcept
{
    return std::min(kOtsuBins - 1, static_cast<int>(v * kOtsuBins));
}

/// Otsu split of a 256-bin nearness histogram.
///
/// Returns the boundary k in [1, 255] maximizing between-class variance
/// (class 0 = bins < k); the first maximum wins. Returns 0 when no boundary
/// separates two non-empty classes.
inline int otsu_boundary(std::span<double const> nearness)
{
    std::array<double, kOtsuBins> counts{};
    for (double v : nearness)
        counts[nearness_bin(v)] += 1.0;
    double total_count = 0.0;
    double total_sum = 0.0;
    for (int b = 0; b < kOtsuBins; ++b) {
        total_count += counts[b];
        total_sum += counts[b] * b;
    }
    // Counts and bin-index sums are integers, so these accumulations are exact.
    double c0 = 0.0;
    double s0 = 0.0;
    double best = -1.0;
    int best_k = 0;
    for (int k = 1; k < kOtsuBins; ++k) {
        c0 += counts[k - 1];
        s0 += counts[k - 1] * (k - 1);
        double const c1 = total_count - c0;
        if (c0 == 0.0 || c1 == 0.0)
            continue;
        double const s1 = total_sum - s0;
        double const diff = s0 / c0 - s1 / c1;
        double const between = (c0 * c1) * diff * diff / (total_count * total_count);
        if (between > best) {
            best = between;
            best_k = k;
        }
    }
    return best_k;
}

/// Splits a nearness map into foreground and background by Otsu's method.
inline TwoLayerProfile two_layer_from_map(DepthMap const& map)
{
    auto values = map.values();
    int const k = otsu_boundary(values);
    if (k == 0)
        throw DataError("no depth separation: nearness map has a single histogram class");
    TwoLayerProfile profile;
    profile.width = map.width();
    profile.height = map.height();
    profile.threshold = static_cast<double>(k) / kOtsuBins;
    profile.mask.resize(values.size());
    double fg_sum = 0.0, bg_sum = 0.0;
    std::size_t fg_n = 0, bg_n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        bool const fg = nearness_bin(values[i]) >= k;
        profile.mask[i] = fg ? 1 : 0;
        if (fg) {
            fg_sum += values[i];
            ++fg_n;
        }
        else {
            bg_sum += values[i];
            ++bg_n;
        }
    }
    profile.fg_nearness = fg_sum / static_cast<double>(fg_n);
    profile.bg_nearness = bg_sum / static_cast<double>(bg_n);
    return profile;
}

/// Bilinear resampling to a new size; output stays in [0,1].
inline DepthMap resample_depth(DepthMap const& map, int width, int height)
{
    if (width < 1 || height < 1)
        throw ShapeError("resample_depth: target dimensions must be positive");
    ImageBuffer out = resize_bilinear(map.plane(), width, height);
    clamp_samples(out, 0.0, 1.0);
    return DepthMap(std::move(out));
}

/// Resamples whichever profile variant to a new size. Two-layer masks use
/// nearest-neighbour sampling so they stay binary.
inline DepthProfile resample_profile(DepthProfile const& profile, int width, int height)
{
    if (auto const* cont = std::get_if<ContinuousProfile>(&profile))
        return ContinuousProfile{resample_depth(cont->map, width, height)};
    auto const& two = std::get<TwoLayerProfile>(profile);
    if (two.width == width && two.height == height)
        return two;
    TwoLayerProfile out = two;
    out.width = width;
    out.height = height;
    out.mask.assign(static_cast<std::size_t>(width) * height, 0);
    for (int y = 0; y < height; ++y) {
        int const sy = static_cast<int>(std::lround(detail::source_coord(y, height, two.height)));
        for (int x = 0; x < width; ++x) {
            int const sx = static_cast<int>(std::lround(detail::source_coord(x, width, two.width)));
            out.mask[static_cast<std::size_t>(y) * width + x]
                = two.mask[static_cast<std::size_t>(sy) * two.width + sx];
        }
    }
    return out;
}

} // namespace jsm
