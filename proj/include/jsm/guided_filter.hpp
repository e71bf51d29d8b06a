#pragma once

#include <jsm/error.hpp>
#include <jsm/image.hpp>
#include <jsm/parallel.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace jsm {

struct GuidedFilterParams
{
    int radius = 1;       ///< window half-width in pixels
    double epsilon = 0.01; ///< regularization on the guide variance

    void validate() const
    {
        if (radius < 1)
            throw ConfigError("guided filter radius must be >= 1, got " + std::to_string(radius));
        if (!(epsilon >= 0.0))
            throw ConfigError("guided filter epsilon must be non-negative");
    }
};

namespace detail {

inline void check_filter_inputs(ImageBuffer const& guide, ImageBuffer const& input,
                                GuidedFilterParams const& p, char const* what)
{
    require_channels(guide, 1, what);
    require_channels(input, 1, what);
    require_same_size(guide, input, what);
    p.validate();
}

// Slope of the local linear model; a zero denominator only happens with
// epsilon == 0 on a flat window, where the model degenerates to the mean.
inline double linear_slope(double cov, double var, double eps) noexcept
{
    double const denom = var + eps;
    return denom != 0.0 ? cov / denom : 0.0;
}

/// Mean over the border-clipped (2r+1)^2 window around every pixel.
///
/// Horizontal pass uses per-row prefix sums; vertical pass slides a column
/// accumulator down the image. Both are parallel over independent rows/columns.
inline std::vector<double> box_mean(std::vector<double> const& src, int width, int height, int r,
                                    Execution exec)
{
    std::vector<double> horiz(src.size());
    parallel_ranges(0, height, exec, [&](int y0, int y1) {
        std::vector<double> prefix(width + 1);
        for (int y = y0; y < y1; ++y) {
            double const* row = src.data() + static_cast<std::size_t>(y) * width;
            prefix[0] = 0.0;
            for (int x = 0; x < width; ++x)
                prefix[x + 1] = prefix[x] + row[x];
            double* out = horiz.data() + static_cast<std::size_t>(y) * width;
            for (int x = 0; x < width; ++x) {
                int const lo = std::max(0, x - r);
                int const hi = std::min(width - 1, x + r);
                out[x] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
            }
        }
    });

    std::vector<double> out(src.size());
    parallel_ranges(0, width, exec, [&](int x0, int x1) {
        int const span = x1 - x0;
        std::vector<double> acc(span, 0.0);
        auto row_ptr = [&](int y) { return horiz.data() + static_cast<std::size_t>(y) * width + x0; };
        for (int y = 0; y <= std::min(r, height - 1); ++y) {
            double const* row = row_ptr(y);
            for (int i = 0; i < span; ++i)
                acc[i] += row[i];
        }
        for (int y = 0; y < height; ++y) {
            int const lo = std::max(0, y - r);
            int const hi = std::min(height - 1, y + r);
            double const count = hi - lo + 1;
            double* dst = out.data() + static_cast<std::size_t>(y) * width + x0;
            for (int i = 0; i < span; ++i)
                dst[i] = acc[i] / count;
            if (y + r + 1 < height) {
                double const* add = row_ptr(y + r + 1);
                for (int i = 0; i < span; ++i)
                    acc[i] += add[i];
            }
            if (y - r >= 0) {
                double const* sub = row_ptr(y - r);
                for (int i = 0; i < span; ++i)
                    acc[i] -= sub[i];
            }
        }
    });
    return out;
}

} // namespace detail

/// Grey-guide guided filter evaluated window by window, O(n·r²).
///
/// For every window k: a_k = cov(guide, input) / (var(guide) + ε),
/// b_k = mean(input) − a_k·mean(guide). The output at i averages
/// a_k·guide_i + b_k over all windows that contain i. Windows are clipped at
/// the image border and statistics use the pixels inside the image only.
inline ImageBuffer guided_filter_reference(ImageBuffer const& guide, ImageBuffer const& input,
                                           GuidedFilterParams const& p)
{
    detail::check_filter_inputs(guide, input, p, "guided_filter_reference");
    int const w = guide.width();
    int const h = guide.height();
    int const r = p.radius;
    ImageBuffer a(w, h, 1), b(w, h, 1);
    for (int ky = 0; ky < h; ++ky)
        for (int kx = 0; kx < w; ++kx) {
            int const x0 = std::max(0, kx - r), x1 = std::min(w - 1, kx + r);
            int const y0 = std::max(0, ky - r), y1 = std::min(h - 1, ky + r);
            double const n = static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
            double sum_g = 0.0, sum_p = 0.0;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    sum_g += guide(x, y);
                    sum_p += input(x, y);
                }
            double const mean_g = sum_g / n;
            double const mean_p = sum_p / n;
            double var = 0.0, cov = 0.0;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    double const dg = guide(x, y) - mean_g;
                    var += dg * dg;
                    cov += dg * (input(x, y) - mean_p);
                }
            var /= n;
            cov /= n;
            double const slope = detail::linear_slope(cov, var, p.epsilon);
            a(kx, ky) = slope;
            b(kx, ky) = mean_p - slope * mean_g;
        }

    ImageBuffer out(w, h, 1);
    for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix) {
            int const x0 = std::max(0, ix - r), x1 = std::min(w - 1, ix + r);
            int const y0 = std::max(0, iy - r), y1 = std::min(h - 1, iy + r);
            double acc = 0.0;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    acc += a(x, y) * guide(ix, iy) + b(x, y);
            out(ix, iy) = acc / static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
        }
    return out;
}

/// Same filter as guided_filter_reference using running-sum box means;
/// cost per pixel is independent of the radius.
inline ImageBuffer guided_filter_fast(ImageBuffer const& guide, ImageBuffer const& input,
                                      GuidedFilterParams const& p, Execution exec = {})
{
    detail::check_filter_inputs(guide, input, p, "guided_filter_fast");
    int const w = guide.width();
    int const h = guide.height();
    std::size_t const n = guide.pixel_count();
    auto g = guide.plane();
    auto in = input.plane();

    std::vector<double> gg(n), gp(n);
    for (std::size_t i = 0; i < n; ++i) {
        gg[i] = g[i] * g[i];
        gp[i] = g[i] * in[i];
    }
    std::vector<double> const g_vec(g.begin(), g.end());
    std::vector<double> const p_vec(in.begin(), in.end());
    auto const mean_g = detail::box_mean(g_vec, w, h, p.radius, exec);
    auto const mean_p = detail::box_mean(p_vec, w, h, p.radius, exec);
    auto const corr_gg = detail::box_mean(gg, w, h, p.radius, exec);
    auto const corr_gp = detail::box_mean(gp, w, h, p.radius, exec);

    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        double const var = corr_gg[i] - mean_g[i] * mean_g[i];
        double const cov = corr_gp[i] - mean_g[i] * mean_p[i];
        a[i] = detail::linear_slope(cov, var, p.epsilon);
        b[i] = mean_p[i] - a[i] * mean_g[i];
    }
    auto const mean_a = detail::box_mean(a, w, h, p.radius, exec);
    auto const mean_b = detail::box_mean(b, w, h, p.radius, exec);

    ImageBuffer out(w, h, 1);
    auto dst = out.plane();
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = mean_a[i] * g[i] + mean_b[i];
    return out;
}

} // namespace jsm
