#pragma once

#include <jsm/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace jsm {

/// Planar floating-point raster.
///
/// Samples are stored plane after plane (all of channel 0, then channel 1, ...),
/// each plane row-major. Nominal range is [0,1], but shading planes and signed
/// detail planes are carried in the same type.
class ImageBuffer
{
public:
    ImageBuffer(int width, int height, int channels, double fill = 0.0)
    : _width(width), _height(height), _channels(channels)
    {
        check_shape(width, height, channels);
        _data.assign(sample_count(), fill);
    }

    ImageBuffer(int width, int height, int channels, std::vector<double> data)
    : _width(width), _height(height), _channels(channels), _data(std::move(data))
    {
        check_shape(width, height, channels);
        if (_data.size() != sample_count())
            throw ShapeError("image data length " + std::to_string(_data.size())
                             + " does not match " + std::to_string(width) + "x"
                             + std::to_string(height) + "x" + std::to_string(channels));
        for (double v : _data)
            if (!std::isfinite(v))
                throw DataError("image data contains a non-finite sample");
    }

    int width() const noexcept { return _width; }
    int height() const noexcept { return _height; }
    int channels() const noexcept { return _channels; }

    std::size_t pixel_count() const noexcept
    {
        return static_cast<std::size_t>(_width) * static_cast<std::size_t>(_height);
    }
    std::size_t sample_count() const noexcept { return pixel_count() * _channels; }

    bool same_size(ImageBuffer const& other) const noexcept
    {
        return _width == other._width && _height == other._height;
    }

    std::size_t index(int x, int y, int c = 0) const noexcept
    {
        return (static_cast<std::size_t>(c) * _height + y) * _width + x;
    }

    double& operator()(int x, int y, int c = 0) noexcept { return _data[index(x, y, c)]; }
    double operator()(int x, int y, int c = 0) const noexcept { return _data[index(x, y, c)]; }

    std::span<double> plane(int c = 0) noexcept
    {
        return {_data.data() + static_cast<std::size_t>(c) * pixel_count(), pixel_count()};
    }
    std::span<double const> plane(int c = 0) const noexcept
    {
        return {_data.data() + static_cast<std::size_t>(c) * pixel_count(), pixel_count()};
    }

    std::span<double> samples() noexcept { return _data; }
    std::span<double const> samples() const noexcept { return _data; }

    /// Single-channel copy of plane `c`.
    ImageBuffer channel(int c) const
    {
        auto p = plane(c);
        return ImageBuffer(_width, _height, 1, std::vector<double>(p.begin(), p.end()));
    }

    bool operator==(ImageBuffer const&) const = default;

private:
    static void check_shape(int width, int height, int channels)
    {
        if (width < 1 || height < 1)
            throw ShapeError("image dimensions must be positive, got " + std::to_string(width)
                             + "x" + std::to_string(height));
        if (channels != 1 && channels != 3)
            throw ShapeError("images carry 1 or 3 channels, got " + std::to_string(channels));
    }

    int _width;
    int _height;
    int _channels;
    std::vector<double> _data;
};

inline void require_channels(ImageBuffer const& img, int channels, char const* what)
{
    if (img.channels() != channels)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(channels)
                         + "-channel image, got " + std::to_string(img.channels()));
}

inline void require_same_size(ImageBuffer const& a, ImageBuffer const& b, char const* what)
{
    if (!a.same_size(b))
        throw ShapeError(std::string(what) + ": dimension mismatch " + std::to_string(a.width())
                         + "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width())
                         + "x" + std::to_string(b.height()));
}

/// Stacks three single-channel planes into one colour image.
inline ImageBuffer merge_channels(ImageBuffer const& r, ImageBuffer const& g, ImageBuffer const& b)
{
    require_channels(r, 1, "merge_channels");
    require_channels(g, 1, "merge_channels");
    require_channels(b, 1, "merge_channels");
    require_same_size(r, g, "merge_channels");
    require_same_size(r, b, "merge_channels");
    ImageBuffer out(r.width(), r.height(), 3);
    std::ranges::copy(r.plane(), out.plane(0).begin());
    std::ranges::copy(g.plane(), out.plane(1).begin());
    std::ranges::copy(b.plane(), out.plane(2).begin());
    return out;
}

inline void clamp_samples(ImageBuffer& img, double lo, double hi) noexcept
{
    for (double& v : img.samples())
        v = std::clamp(v, lo, hi);
}

} // namespace jsm
