#pragma once

#include <jsm/depth.hpp>
#include <jsm/error.hpp>
#include <jsm/image.hpp>
#include <jsm/image_io.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

namespace jsm {

struct Layer
{
    ImageBuffer color; ///< 3 channels, straight (not premultiplied)
    ImageBuffer alpha; ///< 1 channel in [0,1]
    double nearness = 0.0;
};

/// Depth-ordered layers, far to near. The far-most layer is opaque everywhere.
struct LayerStack
{
    std::vector<Layer> layers;
    int width = 0;
    int height = 0;
    double fixation_nearness = 0.0; ///< depth that receives zero displacement

    void validate() const
    {
        if (layers.empty())
            throw DataError("layer stack is empty");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            auto const& l = layers[i];
            require_channels(l.color, 3, "LayerStack");
            require_channels(l.alpha, 1, "LayerStack");
            require_same_size(l.color, l.alpha, "LayerStack");
            if (l.color.width() != width || l.color.height() != height)
                throw ShapeError("layer " + std::to_string(i) + " does not match stack size");
            if (i > 0 && !(layers[i - 1].nearness < l.nearness))
                throw DataError("layers must be strictly ascending in nearness");
        }
    }
};

/// Normalized head offset; each component lies in [-1, 1].
struct HeadPose
{
    double hx = 0.0;
    double hy = 0.0;

    HeadPose clamped() const noexcept
    {
        auto c = [](double v) { return std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0; };
        return {c(hx), c(hy)};
    }
    bool operator==(HeadPose const&) const = default;
};

enum class ParallaxMode
{
    head_coupled, ///< poses supplied from outside
    autonomous,   ///< periodic sinusoidal sway
};

struct ParallaxParams
{
    int layer_count = 4;
    double gain_px = 24.0; ///< pixels per unit head offset at unit relative nearness
    ParallaxMode mode = ParallaxMode::head_coupled;
    int period_frames = 32; ///< autonomous cycle length

    void validate() const
    {
        if (layer_count < 1)
            throw ConfigError("parallax layer_count must be >= 1");
        if (!(gain_px >= 0.0) || !std::isfinite(gain_px))
            throw ConfigError("parallax gain_px must be >= 0");
        if (period_frames < 1)
            throw ConfigError("parallax period must be >= 1 frame");
    }
};

struct Offset
{
    double dx = 0.0;
    double dy = 0.0;
    bool operator==(Offset const&) const = default;
};

/// Screen offset of a layer: linear in head offset and in nearness relative to fixation.
inline Offset displacement(double layer_nearness, HeadPose pose, ParallaxParams const& p,
                           double fixation)
{
    HeadPose const h = pose.clamped();
    double const k = p.gain_px * (layer_nearness - fixation);
    return {h.hx * k, h.hy * k};
}

namespace detail {

/// Fills pixels with alpha == 0 from the covered ones: nearest-neighbour seeding
/// followed by 4-neighbour Jacobi diffusion over the hole (at most 256 sweeps).
inline void inpaint_holes(ImageBuffer& color, ImageBuffer const& alpha)
{
    int const w = color.width();
    int const h = color.height();
    std::vector<std::uint8_t> known(color.pixel_count());
    std::vector<std::size_t> holes;
    auto a = alpha.plane();
    for (std::size_t i = 0; i < known.size(); ++i) {
        known[i] = a[i] > 0.0 ? 1 : 0;
        if (!known[i])
            holes.push_back(i);
    }
    if (holes.empty() || holes.size() == known.size())
        return;

    for (int c = 0; c < 3; ++c) {
        auto plane = color.plane(c);
        std::vector<double> values(plane.begin(), plane.end());
        std::vector<std::uint8_t> valid = known;
        fill_invalid(values, valid, w, h);

        std::vector<double> next = values;
        for (int iter = 0; iter < 256; ++iter) {
            double change = 0.0;
            for (std::size_t i : holes) {
                int const x = static_cast<int>(i % w);
                int const y = static_cast<int>(i / w);
                double sum = 0.0;
                int n = 0;
                if (y > 0) { sum += values[i - w]; ++n; }
                if (x > 0) { sum += values[i - 1]; ++n; }
                if (x + 1 < w) { sum += values[i + 1]; ++n; }
                if (y + 1 < h) { sum += values[i + w]; ++n; }
                next[i] = n > 0 ? sum / n : values[i];
                change = std::max(change, std::abs(next[i] - values[i]));
            }
            for (std::size_t i : holes)
                values[i] = next[i];
            if (change < 1e-6)
                break;
        }
        std::ranges::copy(values, plane.begin());
    }
}

} // namespace detail

/// Splits an image into depth layers.
///
/// Continuous profiles are quantized into `layer_count` equal-width nearness
/// bins (empty bins are dropped); two-layer profiles always yield background
/// and foreground. Each layer's nearness is the mean nearness of its pixels.
/// The far-most layer is hole-filled and made opaque, and becomes the fixation plane.
inline LayerStack build_layers(ImageBuffer const& rgb, DepthProfile const& profile,
                               ParallaxParams const& p)
{
    require_channels(rgb, 3, "build_layers");
    p.validate();
    int const w = rgb.width();
    int const h = rgb.height();
    if (profile_width(profile) != w || profile_height(profile) != h)
        throw ShapeError("build_layers: depth profile does not match the image");
    std::size_t const n = rgb.pixel_count();

    std::vector<int> membership(n);
    std::vector<double> bin_nearness;
    if (auto const* two = std::get_if<TwoLayerProfile>(&profile)) {
        for (std::size_t i = 0; i < n; ++i)
            membership[i] = two->mask[i] ? 1 : 0;
        bin_nearness = {two->bg_nearness, two->fg_nearness};
    }
    else {
        auto values = std::get<ContinuousProfile>(profile).map.values();
        int const bins = p.layer_count;
        std::vector<double> sums(bins, 0.0);
        std::vector<std::size_t> counts(bins, 0);
        for (std::size_t i = 0; i < n; ++i) {
            int const b = std::min(bins - 1, static_cast<int>(values[i] * bins));
            membership[i] = b;
            sums[b] += values[i];
            ++counts[b];
        }
        // Compact away empty bins.
        std::vector<int> remap(bins, -1);
        for (int b = 0; b < bins; ++b)
            if (counts[b] > 0) {
                remap[b] = static_cast<int>(bin_nearness.size());
                bin_nearness.push_back(sums[b] / static_cast<double>(counts[b]));
            }
        for (int& m : membership)
            m = remap[m];
    }

    LayerStack stack;
    stack.width = w;
    stack.height = h;
    for (std::size_t l = 0; l < bin_nearness.size(); ++l) {
        ImageBuffer alpha(w, h, 1);
        auto a = alpha.plane();
        bool any = false;
        for (std::size_t i = 0; i < n; ++i)
            if (membership[i] == static_cast<int>(l)) {
                a[i] = 1.0;
                any = true;
            }
        if (any)
            stack.layers.push_back(Layer{rgb, std::move(alpha), bin_nearness[l]});
    }
    if (stack.layers.empty())
        throw DataError("build_layers produced no layers");

    Layer& far = stack.layers.front();
    detail::inpaint_holes(far.color, far.alpha);
    far.alpha = ImageBuffer(w, h, 1, 1.0);
    stack.fixation_nearness = far.nearness;
    stack.validate();
    return stack;
}

namespace detail {

struct Texel
{
    double alpha;
    double premul[3];
};

// Bilinear fetch at a real-valued position. Opaque base layers clamp to the
// edge; upper layers are transparent outside their extent.
inline Texel sample_layer(Layer const& layer, double sx, double sy, bool clamp_edges)
{
    int const w = layer.color.width();
    int const h = layer.color.height();
    double const fx = std::floor(sx);
    double const fy = std::floor(sy);
    double const tx = sx - fx;
    double const ty = sy - fy;
    int const x0 = static_cast<int>(fx);
    int const y0 = static_cast<int>(fy);

    Texel corners[4];
    int const xs[2] = {x0, x0 + 1};
    int const ys[2] = {y0, y0 + 1};
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) {
            int x = xs[i];
            int y = ys[j];
            Texel& t = corners[j * 2 + i];
            if (clamp_edges) {
                x = std::clamp(x, 0, w - 1);
                y = std::clamp(y, 0, h - 1);
            }
            else if (x < 0 || y < 0 || x >= w || y >= h) {
                t = Texel{0.0, {0.0, 0.0, 0.0}};
                continue;
            }
            t.alpha = layer.alpha(x, y);
            for (int c = 0; c < 3; ++c)
                t.premul[c] = layer.color(x, y, c) * t.alpha;
        }

    auto lerp = [](double a, double b, double t) { return a + t * (b - a); };
    Texel out;
    out.alpha = lerp(lerp(corners[0].alpha, corners[1].alpha, tx),
                     lerp(corners[2].alpha, corners[3].alpha, tx), ty);
    for (int c = 0; c < 3; ++c)
        out.premul[c] = lerp(lerp(corners[0].premul[c], corners[1].premul[c], tx),
                             lerp(corners[2].premul[c], corners[3].premul[c], tx), ty);
    return out;
}

} // namespace detail

/// Composites the stack far to near, each layer translated by its displacement.
inline ImageBuffer render_frame(LayerStack const& stack, HeadPose pose, ParallaxParams const& p)
{
    stack.validate();
    ImageBuffer out(stack.width, stack.height, 3);
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
        Layer const& layer = stack.layers[l];
        Offset const off = displacement(layer.nearness, pose, p, stack.fixation_nearness);
        bool const base = l == 0;
        for (int y = 0; y < stack.height; ++y)
            for (int x = 0; x < stack.width; ++x) {
                auto const t = detail::sample_layer(layer, x - off.dx, y - off.dy, base);
                if (t.alpha <= 0.0)
                    continue;
                for (int c = 0; c < 3; ++c)
                    out(x, y, c) = t.premul[c] + (1.0 - t.alpha) * out(x, y, c);
            }
    }
    return out;
}

/// The stack composited with no displacement.
inline ImageBuffer flatten(LayerStack const& stack)
{
    ParallaxParams still;
    still.gain_px = 0.0;
    return render_frame(stack, {}, still);
}

inline std::vector<ImageBuffer> render_trajectory(LayerStack const& stack,
                                                  std::vector<HeadPose> const& poses,
                                                  ParallaxParams const& p)
{
    std::vector<ImageBuffer> frames;
    frames.reserve(poses.size());
    for (auto const& pose : poses)
        frames.push_back(render_frame(stack, pose, p));
    return frames;
}

/// Horizontal sinusoidal sway; pose i depends only on i modulo the period.
inline std::vector<HeadPose> autonomous_poses(int period, int count)
{
    if (period < 1)
        throw ConfigError("autonomous period must be >= 1");
    std::vector<HeadPose> poses;
    poses.reserve(std::max(count, 0));
    for (int i = 0; i < count; ++i) {
        double const phase = static_cast<double>(i % period) / period;
        poses.push_back({std::sin(2.0 * std::numbers::pi * phase), 0.0});
    }
    return poses;
}

/// Writes one straight-alpha RGBA PNG per layer and `manifest.json`.
inline nlohmann::json export_stack(LayerStack const& stack, ParallaxParams const& p,
                                   std::filesystem::path const& dir)
{
    stack.validate();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create layer directory '" + dir.string() + "'");

    nlohmann::json manifest;
    manifest["width"] = stack.width;
    manifest["height"] = stack.height;
    manifest["fixation_nearness"] = stack.fixation_nearness;
    manifest["gain_px"] = p.gain_px;
    manifest["layers"] = nlohmann::json::array();
    for (std::size_t i = 0; i < stack.layers.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "layer_%02zu.png", i);
        save_rgba(stack.layers[i].color, stack.layers[i].alpha, dir / name);
        manifest["layers"].push_back({{"file", name}, {"nearness", stack.layers[i].nearness}});
    }
    std::ofstream out(dir / "manifest.json");
    if (!out)
        throw IoError("cannot write '" + (dir / "manifest.json").string() + "'");
    out << manifest.dump(2) << "\n";
    if (!out)
        throw IoError("write error on '" + (dir / "manifest.json").string() + "'");
    return manifest;
}

struct ImportedStack
{
    LayerStack stack;
    double gain_px = 0.0;
};

/// Reads a stack written by export_stack. `path` is the directory or the manifest itself.
inline ImportedStack import_stack(std::filesystem::path const& path)
{
    auto const manifest_path = std::filesystem::is_directory(path) ? path / "manifest.json" : path;
    auto const dir = manifest_path.parent_path();
    std::ifstream in(manifest_path);
    if (!in)
        throw IoError("cannot open '" + manifest_path.string() + "'");
    nlohmann::json m;
    try {
        in >> m;
        ImportedStack result;
        result.stack.width = m.at("width").get<int>();
        result.stack.height = m.at("height").get<int>();
        result.stack.fixation_nearness = m.at("fixation_nearness").get<double>();
        result.gain_px = m.at("gain_px").get<double>();
        for (auto const& entry : m.at("layers")) {
            auto const file = entry.at("file").get<std::string>();
            auto [color, alpha] = load_rgba(dir / file);
            result.stack.layers.push_back(
                Layer{std::move(color), std::move(alpha), entry.at("nearness").get<double>()});
        }
        result.stack.validate();
        return result;
    }
    catch (nlohmann::json::exception const& e) {
        throw FormatError("invalid manifest '" + manifest_path.string() + "': " + e.what());
    }
}

} // namespace jsm
