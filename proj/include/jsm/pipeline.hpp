#pragma once

#include <jsm/color.hpp>
#include <jsm/decomposition.hpp>
#include <jsm/depth.hpp>
#include <jsm/error.hpp>
#include <jsm/guided_filter.hpp>
#include <jsm/image_io.hpp>
#include <jsm/metrics.hpp>
#include <jsm/parallax.hpp>
#include <jsm/parallel.hpp>
#include <jsm/resample.hpp>
#include <jsm/retargeting.hpp>
#include <jsm/synthetic.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace jsm {

enum class ProfileKind
{
    continuous,
    two_layer,
};

struct Resize
{
    int width = 1920;
    int height = 1080;
};

/// Either a periodic sway of N frames or poses read from a text file.
struct TrajectorySpec
{
    int sinusoid_frames = 0;
    std::filesystem::path pose_file;
};

struct PipelineConfig
{
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> depths; ///< empty, or one per input
    DepthKind depth_kind = DepthKind::disparity;
    std::optional<DepthPrior> depth_prior;
    ProfileKind profile = ProfileKind::continuous;
    DecompParams decomp;
    RetargetParams retarget;
    ParallaxParams parallax;
    std::filesystem::path out_dir = "out";
    std::optional<Resize> resize;
    bool export_layers = false;
    std::optional<TrajectorySpec> trajectory;
    int threads = 1;
    int output_bit_depth = 8;

    void validate() const
    {
        if (inputs.empty())
            throw ConfigError("no input images given");
        if (!depths.empty() && depths.size() != inputs.size())
            throw ConfigError("give either no --depth or one per --input ("
                              + std::to_string(inputs.size()) + " inputs, "
                              + std::to_string(depths.size()) + " depths)");
        for (auto const& p : inputs)
            if (!std::filesystem::exists(p))
                throw ConfigError("input '" + p.string() + "' does not exist");
        for (auto const& p : depths)
            if (!std::filesystem::exists(p))
                throw ConfigError("depth '" + p.string() + "' does not exist");
        if (trajectory && !trajectory->pose_file.empty()
            && !std::filesystem::exists(trajectory->pose_file))
            throw ConfigError("pose file '" + trajectory->pose_file.string() + "' does not exist");
        if (threads < 1)
            throw ConfigError("--threads must be >= 1");
        if (output_bit_depth != 8 && output_bit_depth != 16)
            throw ConfigError("output bit depth must be 8 or 16");
        if (resize && (resize->width < 1 || resize->height < 1))
            throw ConfigError("resize target must be positive");
        decomp.validate();
        retarget.validate();
        parallax.validate();
    }
};

// ---- configuration parsing --------------------------------------------------

namespace detail {

inline double parse_real(std::string const& key, std::string const& v)
{
    try {
        std::size_t used = 0;
        double const d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d))
            throw std::invalid_argument(v);
        return d;
    }
    catch (std::logic_error const&) {
        throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    }
}

inline int parse_int(std::string const& key, std::string const& v)
{
    try {
        std::size_t used = 0;
        int const i = std::stoi(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return i;
    }
    catch (std::logic_error const&) {
        throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
    }
}

inline bool parse_bool(std::string const& key, std::string v)
{
    std::ranges::transform(v, v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "1" || v == "true" || v == "on" || v == "yes" || v == "y")
        return true;
    if (v == "0" || v == "false" || v == "off" || v == "no" || v == "n")
        return false;
    throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
}

inline std::vector<std::string> split(std::string const& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        parts.push_back(cur);
    return parts;
}

} // namespace detail

/// Parses "a,b,c,d" toggles ordered base-shading, detail-shading, shading contrast, albedo contrast.
inline Ablation parse_ablation(std::string const& text)
{
    auto parts = detail::split(text, ',');
    if (parts.size() != 4)
        throw ConfigError("ablation expects four comma-separated booleans, got '" + text + "'");
    return {detail::parse_bool("ablation", parts[0]), detail::parse_bool("ablation", parts[1]),
            detail::parse_bool("ablation", parts[2]), detail::parse_bool("ablation", parts[3])};
}

inline Resize parse_resize(std::string const& text)
{
    auto const x = text.find_first_of("xX");
    if (x == std::string::npos)
        throw ConfigError("resize expects WxH, got '" + text + "'");
    Resize r{detail::parse_int("resize", text.substr(0, x)),
             detail::parse_int("resize", text.substr(x + 1))};
    if (r.width < 1 || r.height < 1)
        throw ConfigError("resize target must be positive, got '" + text + "'");
    return r;
}

inline TrajectorySpec parse_trajectory(std::string const& text)
{
    if (text.rfind("sin:", 0) == 0) {
        int const n = detail::parse_int("trajectory", text.substr(4));
        if (n < 1)
            throw ConfigError("trajectory sin:N needs N >= 1");
        return {n, {}};
    }
    if (text.rfind("file:", 0) == 0 && text.size() > 5)
        return {0, text.substr(5)};
    throw ConfigError("trajectory expects sin:N or file:path, got '" + text + "'");
}

/// One pose per line as "hx hy"; blank lines and '#' comments are skipped.
inline std::vector<HeadPose> read_pose_file(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open pose file '" + path.string() + "'");
    std::vector<HeadPose> poses;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto const hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream fields(line);
        HeadPose pose;
        if (!(fields >> pose.hx)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 'hx hy'");
        }
        if (!(fields >> pose.hy))
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 'hx hy'");
        poses.push_back(pose.clamped());
    }
    return poses;
}

/// Applies one flat dotted setting (from a config file or a command-line flag).
inline void apply_setting(PipelineConfig& cfg, std::string const& key, std::string const& value)
{
    using namespace detail;
    if (key == "input")
        cfg.inputs.emplace_back(value);
    else if (key == "depth")
        cfg.depths.emplace_back(value);
    else if (key == "depth_kind") {
        if (value == "disparity")
            cfg.depth_kind = DepthKind::disparity;
        else if (value == "depth")
            cfg.depth_kind = DepthKind::depth;
        else
            throw ConfigError("depth_kind must be disparity or depth, got '" + value + "'");
    }
    else if (key == "depth_prior") {
        if (value == "vertical-gradient")
            cfg.depth_prior = DepthPrior::vertical_gradient;
        else if (value == "none")
            cfg.depth_prior.reset();
        else
            throw ConfigError("depth_prior must be vertical-gradient, got '" + value + "'");
    }
    else if (key == "profile") {
        if (value == "continuous")
            cfg.profile = ProfileKind::continuous;
        else if (value == "two-layer")
            cfg.profile = ProfileKind::two_layer;
        else
            throw ConfigError("profile must be two-layer or continuous, got '" + value + "'");
    }
    else if (key == "resize")
        cfg.resize = parse_resize(value);
    else if (key == "out")
        cfg.out_dir = value;
    else if (key == "export_layers")
        cfg.export_layers = parse_bool(key, value);
    else if (key == "trajectory")
        cfg.trajectory = parse_trajectory(value);
    else if (key == "threads")
        cfg.threads = parse_int(key, value);
    else if (key == "output_bit_depth")
        cfg.output_bit_depth = parse_int(key, value);
    else if (key == "decomp.albedo_radius")
        cfg.decomp.albedo_radius = parse_int(key, value);
    else if (key == "decomp.albedo_eps")
        cfg.decomp.albedo_eps = parse_real(key, value);
    else if (key == "decomp.shading_radius")
        cfg.decomp.shading_radius = parse_int(key, value);
    else if (key == "decomp.shading_eps")
        cfg.decomp.shading_eps = parse_real(key, value);
    else if (key == "retarget.gamma")
        cfg.retarget.gamma = parse_real(key, value);
    else if (key == "retarget.trunc_lo")
        cfg.retarget.trunc_lo = parse_real(key, value);
    else if (key == "retarget.trunc_hi")
        cfg.retarget.trunc_hi = parse_real(key, value);
    else if (key == "retarget.detail_gain")
        cfg.retarget.detail_gain = parse_real(key, value);
    else if (key == "retarget.alpha_shading")
        cfg.retarget.alpha_shading = parse_real(key, value);
    else if (key == "retarget.beta_texture")
        cfg.retarget.beta_texture = parse_real(key, value);
    else if (key == "retarget.albedo_contrast")
        cfg.retarget.albedo_contrast = parse_real(key, value);
    else if (key == "retarget.albedo_pivot") {
        if (value == "mean")
            cfg.retarget.albedo_pivot.reset();
        else
            cfg.retarget.albedo_pivot = parse_real(key, value);
    }
    else if (key == "retarget.ablation" || key == "ablation")
        cfg.retarget.ablation = parse_ablation(value);
    else if (key == "parallax.layer_count")
        cfg.parallax.layer_count = parse_int(key, value);
    else if (key == "parallax.gain_px")
        cfg.parallax.gain_px = parse_real(key, value);
    else if (key == "parallax.mode") {
        if (value == "head-coupled")
            cfg.parallax.mode = ParallaxMode::head_coupled;
        else if (value == "autonomous")
            cfg.parallax.mode = ParallaxMode::autonomous;
        else
            throw ConfigError("parallax.mode must be head-coupled or autonomous");
    }
    else if (key == "parallax.period_frames")
        cfg.parallax.period_frames = parse_int(key, value);
    else
        throw ConfigError("unknown configuration key '" + key + "'");
}

/// Applies a flat JSON object of dotted keys. Arrays are accepted for "input" and "depth".
inline void apply_config_json(PipelineConfig& cfg, nlohmann::json const& j)
{
    if (!j.is_object())
        throw ConfigError("configuration must be a JSON object of dotted keys");
    for (auto const& [key, value] : j.items()) {
        auto as_text = [&](nlohmann::json const& v) -> std::string {
            if (v.is_string())
                return v.get<std::string>();
            if (v.is_boolean())
                return v.get<bool>() ? "true" : "false";
            if (v.is_number_integer())
                return std::to_string(v.get<long long>());
            if (v.is_number())
                return v.dump();
            throw ConfigError("'" + key + "' has an unsupported value type");
        };
        if (value.is_array()) {
            if (key != "input" && key != "depth")
                throw ConfigError("'" + key + "' does not take a list");
            for (auto const& item : value)
                apply_setting(cfg, key, as_text(item));
        }
        else {
            apply_setting(cfg, key, as_text(value));
        }
    }
}

inline void load_config_file(PipelineConfig& cfg, std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    }
    catch (nlohmann::json::exception const& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    apply_config_json(cfg, j);
}

// ---- per-image processing -----------------------------------------------------

inline constexpr std::array<char const*, 5> kStageNames{
    "depth_analysis", "decomposition", "retargeting", "recomposition", "motion_parallax"};

using Logger = std::function<void(std::string const&)>;

inline Logger stderr_logger()
{
    static std::mutex mutex;
    return [](std::string const& msg) {
        std::lock_guard lock(mutex);
        std::cerr << "jsm: " << msg << "\n";
    };
}

/// Builds the depth profile for one image from a file, the prior, or the flat fallback.
inline DepthProfile analyze_depth(PipelineConfig const& cfg, std::size_t index, int width,
                                  int height, Logger const& log)
{
    std::optional<DepthMap> map;
    if (!cfg.depths.empty())
        map = depth_from_file(cfg.depths[index], cfg.depth_kind);
    else if (cfg.depth_prior)
        map = depth_from_prior(width, height, *cfg.depth_prior);
    else {
        log("no depth source for '" + cfg.inputs[index].string()
            + "'; using flat depth (depth-independent enhancement)");
        map = DepthMap(width, height, 0.5);
    }
    if (map->width() != width || map->height() != height)
        map = resample_depth(*map, width, height);

    if (cfg.profile == ProfileKind::two_layer) {
        try {
            return two_layer_from_map(*map);
        }
        catch (DataError const& e) {
            log(cfg.inputs[index].string() + ": " + e.what() + "; falling back to continuous");
        }
    }
    return ContinuousProfile{std::move(*map)};
}

/// Foreground mask of a profile: the two-layer mask, or nearness >= 0.5.
inline std::vector<std::uint8_t> foreground_mask(DepthProfile const& profile)
{
    if (auto const* two = std::get_if<TwoLayerProfile>(&profile))
        return two->mask;
    auto values = std::get<ContinuousProfile>(profile).map.values();
    std::vector<std::uint8_t> mask(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        mask[i] = values[i] >= 0.5 ? 1 : 0;
    return mask;
}

inline std::vector<std::uint8_t> invert_mask(std::vector<std::uint8_t> mask)
{
    for (auto& m : mask)
        m = m ? 0 : 1;
    return mask;
}

/// Texture and contrast metrics for one enhancement pass.
inline nlohmann::json stage_metrics(EnhanceStages const& s, ImageBuffer const& input,
                                    std::vector<std::uint8_t> const& fg)
{
    auto const bg = invert_mask(fg);
    auto const& d = s.decomposition;
    nlohmann::json m;
    m["rms_contrast_in"] = rms_contrast(d.luminance);
    m["rms_contrast_out"] = rms_contrast(luminance_of(s.output));
    m["rms_contrast_out_preclamp"] = rms_contrast(s.luminance_unclamped);
    m["detail_variance_fg_in"] = detail_variance(d.albedo, d.detail, fg);
    m["detail_variance_fg_out"] = detail_variance(s.albedo, s.detail, fg);
    m["detail_variance_bg_in"] = detail_variance(d.albedo, d.detail, bg);
    m["detail_variance_bg_out"] = detail_variance(s.albedo, s.detail, bg);
    m["psnr_vs_input_db"] = psnr(input, s.output);
    return m;
}

inline std::vector<HeadPose> trajectory_poses(TrajectorySpec const& spec)
{
    if (spec.sinusoid_frames > 0)
        return autonomous_poses(spec.sinusoid_frames, spec.sinusoid_frames);
    return read_pose_file(spec.pose_file);
}

inline ImageBuffer load_input(PipelineConfig const& cfg, std::size_t index)
{
    ImageBuffer img = load_image(cfg.inputs[index]);
    if (img.channels() == 1)
        img = gray_to_rgb(img);
    if (cfg.resize)
        img = resize_bilinear(img, cfg.resize->width, cfg.resize->height);
    return img;
}

inline nlohmann::json process_image(PipelineConfig const& cfg, std::size_t index, Execution exec,
                                    Logger const& log)
{
    using clock = std::chrono::steady_clock;
    auto const start = clock::now();
    auto const& input_path = cfg.inputs[index];
    auto const stem = input_path.stem().string();

    nlohmann::json report;
    report["input"] = input_path.string();
    ImageBuffer const rgb = load_input(cfg, index);
    report["width"] = rgb.width();
    report["height"] = rgb.height();

    auto t0 = clock::now();
    DepthProfile const profile = analyze_depth(cfg, index, rgb.width(), rgb.height(), log);
    double const depth_ms = detail::elapsed_ms(t0);
    report["profile"] = std::holds_alternative<TwoLayerProfile>(profile) ? "two-layer"
                                                                         : "continuous";

    EnhanceStages stages = enhance_stages(rgb, profile, cfg.decomp, cfg.retarget, exec);
    auto const output_path = cfg.out_dir / (stem + "_jsm.png");
    save_image(stages.output, output_path, cfg.output_bit_depth);
    report["output"] = output_path.string();

    t0 = clock::now();
    LayerStack const stack = build_layers(stages.output, profile, cfg.parallax);
    if (cfg.export_layers) {
        auto const dir = cfg.out_dir / (stem + "_layers");
        export_stack(stack, cfg.parallax, dir);
        report["layers"] = dir.string();
    }
    std::optional<TrajectorySpec> trajectory = cfg.trajectory;
    if (!trajectory && cfg.parallax.mode == ParallaxMode::autonomous)
        trajectory = TrajectorySpec{cfg.parallax.period_frames, {}};
    if (trajectory) {
        auto const frames_dir = cfg.out_dir / (stem + "_frames");
        std::filesystem::create_directories(frames_dir);
        auto const frames = render_trajectory(stack, trajectory_poses(*trajectory), cfg.parallax);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%04zu.png", i);
            save_image(frames[i], frames_dir / name, cfg.output_bit_depth);
        }
        report["frames"] = {{"dir", frames_dir.string()}, {"count", frames.size()}};
    }
    double const parallax_ms = detail::elapsed_ms(t0);

    report["layer_count"] = stack.layers.size();
    report["timings_ms"] = {
        {"depth_analysis", depth_ms},           {"decomposition", stages.decomposition_ms},
        {"retargeting", stages.retargeting_ms}, {"recomposition", stages.recomposition_ms},
        {"motion_parallax", parallax_ms},       {"total", detail::elapsed_ms(start)},
    };
    report["metrics"] = stage_metrics(stages, rgb, foreground_mask(profile));
    report["status"] = "ok";
    return report;
}

/// Runs `job(i)` for i in [0, n) on up to `workers` threads.
template <typename Job>
void run_pool(std::size_t n, int workers, Job&& job)
{
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++)
            job(i);
    };
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(worker);
    worker();
}

struct RunResult
{
    int exit_code = 0;
    nlohmann::json report;
};

inline Execution per_image_execution(int threads, std::size_t images, int& workers)
{
    workers = static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(images, 1)));
    return Execution{std::max(1, threads / workers)};
}

inline void write_report(nlohmann::json const& report, std::filesystem::path const& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write report '" + path.string() + "'");
    out << report.dump(2) << "\n";
}

/// Enhances every input; writes images, optional layers/frames, and report.json.
inline RunResult run(PipelineConfig const& cfg, Logger log = stderr_logger())
{
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    int workers = 1;
    Execution const exec = per_image_execution(cfg.threads, cfg.inputs.size(), workers);

    std::vector<nlohmann::json> images(cfg.inputs.size());
    run_pool(cfg.inputs.size(), workers, [&](std::size_t i) {
        try {
            images[i] = process_image(cfg, i, exec, log);
        }
        catch (std::exception const& e) {
            log(cfg.inputs[i].string() + ": " + e.what());
            images[i] = {{"input", cfg.inputs[i].string()}, {"status", "failed"},
                         {"error", e.what()}};
        }
    });

    RunResult result;
    result.report["images"] = images;
    result.report["stages"] = kStageNames;
    std::size_t failed = 0;
    for (auto const& img : images)
        failed += img.at("status") != "ok";
    result.report["failed"] = failed;
    result.exit_code = failed > 0 ? 1 : 0;
    write_report(result.report, cfg.out_dir / "report.json");
    return result;
}

// ---- ablation harness --------------------------------------------------------

/// The cumulative toggle sets: none, a, a+b, a+b+c, a+b+c+d.
inline std::array<Ablation, 5> ablation_sequence()
{
    return {Ablation{false, false, false, false}, Ablation{true, false, false, false},
            Ablation{true, true, false, false}, Ablation{true, true, true, false},
            Ablation{true, true, true, true}};
}

struct AblationPanels
{
    std::vector<ImageBuffer> panels;
    std::vector<nlohmann::json> metrics;
};

/// Renders the five cumulative ablation configurations of one image.
inline AblationPanels ablation_panels(ImageBuffer const& rgb, DepthProfile const& profile,
                                      DecompParams const& dp, RetargetParams const& rp,
                                      Execution exec = {})
{
    AblationPanels out;
    auto const fg = foreground_mask(profile);
    auto const toggles = ablation_sequence();
    for (std::size_t k = 0; k < toggles.size(); ++k) {
        RetargetParams p = rp;
        p.ablation = toggles[k];
        EnhanceStages stages = enhance_stages(rgb, profile, dp, p, exec);
        nlohmann::json m = stage_metrics(stages, rgb, fg);
        m["panel"] = k;
        m["toggles"] = {toggles[k].base_shading, toggles[k].detail_shading,
                        toggles[k].shading_contrast, toggles[k].albedo_contrast};
        out.metrics.push_back(std::move(m));
        out.panels.push_back(std::move(stages.output));
    }
    return out;
}

/// Side-by-side strip of panels with a toggle legend under each: four boxes,
/// filled when the corresponding sub-operator is enabled.
inline ImageBuffer compose_panel_strip(std::vector<ImageBuffer> const& panels,
                                       std::array<Ablation, 5> const& toggles)
{
    int const w = panels.front().width();
    int const h = panels.front().height();
    int const gap = 4;
    int const box = std::max(6, std::min(w / 10, 24));
    int const legend = 4 * (box + 2) + 4;
    int const total_w = static_cast<int>(panels.size()) * w + (static_cast<int>(panels.size()) - 1) * gap;
    ImageBuffer strip(total_w, h + legend, 3, 1.0);
    for (std::size_t k = 0; k < panels.size(); ++k) {
        int const ox = static_cast<int>(k) * (w + gap);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    strip(ox + x, y, c) = panels[k](x, y, c);
        bool const flags[4] = {toggles[k].base_shading, toggles[k].detail_shading,
                               toggles[k].shading_contrast, toggles[k].albedo_contrast};
        for (int row = 0; row < 4; ++row) {
            int const by = h + 2 + row * (box + 2);
            int const bx = ox + (w - box) / 2;
            for (int y = by; y < by + box; ++y)
                for (int x = bx; x < bx + box; ++x) {
                    bool const border = y == by || y == by + box - 1 || x == bx || x == bx + box - 1;
                    double const v = flags[row] || border ? 0.0 : 1.0;
                    for (int c = 0; c < 3; ++c)
                        strip(x, y, c) = v;
                }
        }
    }
    return strip;
}

/// Ablation study per input: panels, labelled strip, and ablation_report.json.
inline RunResult run_ablation(PipelineConfig const& cfg, Logger log = stderr_logger())
{
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    int workers = 1;
    Execution const exec = per_image_execution(cfg.threads, cfg.inputs.size(), workers);
    std::vector<nlohmann::json> images(cfg.inputs.size());
    run_pool(cfg.inputs.size(), workers, [&](std::size_t i) {
        try {
            ImageBuffer const rgb = load_input(cfg, i);
            DepthProfile const profile = analyze_depth(cfg, i, rgb.width(), rgb.height(), log);
            AblationPanels result = ablation_panels(rgb, profile, cfg.decomp, cfg.retarget, exec);
            auto const stem = cfg.inputs[i].stem().string();
            auto const strip_path = cfg.out_dir / (stem + "_ablation.png");
            save_image(compose_panel_strip(result.panels, ablation_sequence()), strip_path,
                       cfg.output_bit_depth);
            nlohmann::json entry;
            entry["input"] = cfg.inputs[i].string();
            entry["panel_image"] = strip_path.string();
            entry["panels"] = result.metrics;
            entry["status"] = "ok";
            images[i] = std::move(entry);
        }
        catch (std::exception const& e) {
            log(cfg.inputs[i].string() + ": " + e.what());
            images[i] = {{"input", cfg.inputs[i].string()}, {"status", "failed"},
                         {"error", e.what()}};
        }
    });
    RunResult result;
    result.report["images"] = images;
    std::size_t failed = 0;
    for (auto const& img : images)
        failed += img.at("status") != "ok";
    result.report["failed"] = failed;
    result.exit_code = failed > 0 ? 1 : 0;
    write_report(result.report, cfg.out_dir / "ablation_report.json");
    return result;
}

// ---- benchmarks ----------------------------------------------------------------

enum class BenchKind
{
    guided_filter,
    pipeline,
};

inline double median_of(std::vector<double> v)
{
    std::ranges::sort(v);
    return v[v.size() / 2];
}

inline ImageBuffer random_plane(int w, int h, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ImageBuffer img(w, h, 1);
    for (double& v : img.samples())
        v = u(rng);
    return img;
}

/// Median-of-`repeats` wall times at the given workload size, as JSON.
inline nlohmann::json run_bench(BenchKind which, Execution exec = {}, int width = 1920,
                                int height = 1080, int repeats = 5)
{
    using clock = std::chrono::steady_clock;
    nlohmann::json report;
    report["width"] = width;
    report["height"] = height;
    report["repeats"] = repeats;
    report["threads"] = exec.threads;

    if (which == BenchKind::guided_filter) {
        report["bench"] = "guided-filter";
        GuidedFilterParams const params{16, 1e-3};
        ImageBuffer const guide = random_plane(width, height, 7);
        ImageBuffer const input = random_plane(width, height, 8);
        std::vector<double> times;
        for (int r = 0; r < repeats; ++r) {
            auto const t0 = clock::now();
            auto out = guided_filter_fast(guide, input, params, exec);
            times.push_back(detail::elapsed_ms(t0));
        }
        report["fast_ms"] = median_of(times);
        report["radius"] = params.radius;

        ImageBuffer const small_g = random_plane(64, 64, 9);
        ImageBuffer const small_p = random_plane(64, 64, 10);
        GuidedFilterParams const small_params{4, 1e-3};
        std::vector<double> ref_t, fast_t;
        double max_diff = 0.0;
        for (int r = 0; r < repeats; ++r) {
            auto t0 = clock::now();
            auto ref = guided_filter_reference(small_g, small_p, small_params);
            ref_t.push_back(detail::elapsed_ms(t0));
            t0 = clock::now();
            auto fast = guided_filter_fast(small_g, small_p, small_params, exec);
            fast_t.push_back(detail::elapsed_ms(t0));
            max_diff = std::max(max_diff, max_abs_diff(ref, fast));
        }
        report["small"] = {{"size", 64},
                           {"radius", small_params.radius},
                           {"reference_ms", median_of(ref_t)},
                           {"fast_ms", median_of(fast_t)},
                           {"max_abs_diff", max_diff},
                           {"equal", max_diff <= 1e-6}};
        return report;
    }

    report["bench"] = "pipeline";
    auto const scene = synthetic::make_test_card(width, height, 3);
    // Disparity must be positive to count as valid; offset the nearness map.
    std::vector<double> raw;
    for (double v : scene.depth.values())
        raw.push_back(1.0 + v);
    DecompParams const dp;
    RetargetParams const rp;
    ParallaxParams const pp;
    std::array<std::vector<double>, 5> stage_times;
    std::vector<double> totals;
    std::optional<ImageBuffer> first_output;
    bool deterministic = true;
    for (int r = 0; r < repeats; ++r) {
        auto const start = clock::now();
        auto t0 = clock::now();
        DepthProfile const profile
            = ContinuousProfile{depth_from_samples(width, height, raw, DepthKind::disparity)};
        stage_times[0].push_back(detail::elapsed_ms(t0));
        EnhanceStages stages = enhance_stages(scene.rgb, profile, dp, rp, exec);
        stage_times[1].push_back(stages.decomposition_ms);
        stage_times[2].push_back(stages.retargeting_ms);
        stage_times[3].push_back(stages.recomposition_ms);
        t0 = clock::now();
        LayerStack const stack = build_layers(stages.output, profile, pp);
        auto frame = render_frame(stack, {1.0, 0.0}, pp);
        stage_times[4].push_back(detail::elapsed_ms(t0));
        totals.push_back(detail::elapsed_ms(start));
        if (!first_output)
            first_output = stages.output;
        else if (!(stages.output == *first_output))
            deterministic = false;
    }
    nlohmann::json stages_json;
    double sum = 0.0;
    for (std::size_t s = 0; s < kStageNames.size(); ++s) {
        double const m = median_of(stage_times[s]);
        stages_json[kStageNames[s]] = m;
        sum += m;
    }
    report["stages_ms"] = stages_json;
    report["stages_sum_ms"] = sum;
    report["total_ms"] = median_of(totals);
    report["deterministic"] = deterministic;
    return report;
}

} // namespace jsm
