// Batch driver: depth analysis, shading/contrast retargeting, motion parallax.

#include <jsm/pipeline.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfigError = 2;

struct Flags
{
    std::vector<std::string> inputs;
    std::vector<std::string> depths;
    std::optional<std::string> depth_kind;
    std::optional<std::string> depth_prior;
    std::optional<std::string> profile;
    std::optional<std::string> resize;
    std::optional<std::string> out;
    std::optional<std::string> ablation;
    std::optional<std::string> trajectory;
    std::optional<std::string> bench;
    std::optional<std::string> config;
    std::optional<int> threads;
    std::optional<int> bit_depth;
    std::vector<std::string> overrides;
    bool export_layers = false;
    bool ablation_study = false;
};

jsm::PipelineConfig build_config(Flags const& f)
{
    jsm::PipelineConfig cfg;
    if (f.config)
        jsm::load_config_file(cfg, *f.config);
    if (!f.inputs.empty()) {
        cfg.inputs.clear();
        for (auto const& p : f.inputs)
            jsm::apply_setting(cfg, "input", p);
    }
    if (!f.depths.empty()) {
        cfg.depths.clear();
        for (auto const& p : f.depths)
            jsm::apply_setting(cfg, "depth", p);
    }
    auto apply = [&](char const* key, std::optional<std::string> const& v) {
        if (v)
            jsm::apply_setting(cfg, key, *v);
    };
    apply("depth_kind", f.depth_kind);
    apply("depth_prior", f.depth_prior);
    apply("profile", f.profile);
    apply("resize", f.resize);
    apply("out", f.out);
    apply("retarget.ablation", f.ablation);
    apply("trajectory", f.trajectory);
    if (f.threads)
        cfg.threads = *f.threads;
    if (f.bit_depth)
        cfg.output_bit_depth = *f.bit_depth;
    if (f.export_layers)
        cfg.export_layers = true;
    for (auto const& kv : f.overrides) {
        auto const eq = kv.find('=');
        if (eq == std::string::npos)
            throw jsm::ConfigError("--set expects key=value, got '" + kv + "'");
        jsm::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monocular depth-perception enhancement: shading/contrast retargeting and "
                 "layered motion parallax"};
    Flags f;
    app.add_option("--input", f.inputs, "Input image(s): PNG or binary PPM/PGM");
    app.add_option("--depth", f.depths, "Depth or disparity file(s) (PFM or 16-bit PNG), one per input");
    app.add_option("--depth-kind", f.depth_kind, "disparity | depth");
    app.add_option("--depth-prior", f.depth_prior, "Built-in depth when no file: vertical-gradient");
    app.add_option("--profile", f.profile, "two-layer | continuous");
    app.add_option("--resize", f.resize, "Resize inputs to WxH (e.g. 1920x1080)");
    app.add_option("--out", f.out, "Output directory");
    app.add_option("--ablation", f.ablation,
                   "Toggles a,b,c,d: base-shading, detail-shading, shading contrast, albedo contrast");
    app.add_flag("--ablation-study", f.ablation_study,
                 "Render the five cumulative ablation panels instead of a single result");
    app.add_flag("--export-layers", f.export_layers, "Write the layer stack and manifest.json");
    app.add_option("--trajectory", f.trajectory, "Render parallax frames: sin:N or file:path");
    app.add_option("--bench", f.bench, "Run a benchmark: guided-filter | pipeline");
    app.add_option("--config", f.config, "JSON config file with flat dotted keys");
    app.add_option("--threads", f.threads, "Worker threads");
    app.add_option("--bit-depth", f.bit_depth, "Output PNG bit depth: 8 or 16");
    app.add_option("--set", f.overrides, "Override any config key: key=value");

    try {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    try {
        if (f.bench) {
            jsm::BenchKind kind;
            if (*f.bench == "guided-filter")
                kind = jsm::BenchKind::guided_filter;
            else if (*f.bench == "pipeline")
                kind = jsm::BenchKind::pipeline;
            else
                throw jsm::ConfigError("--bench expects guided-filter or pipeline");
            jsm::Execution exec{f.threads.value_or(1)};
            std::cout << jsm::run_bench(kind, exec).dump(2) << std::endl;
            return 0;
        }
        jsm::PipelineConfig const cfg = build_config(f);
        auto const result = f.ablation_study ? jsm::run_ablation(cfg) : jsm::run(cfg);
        return result.exit_code;
    }
    catch (jsm::ConfigError const& e) {
        std::cerr << "jsm: config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    catch (std::exception const& e) {
        std::cerr << "jsm: " << e.what() << "\n";
        return 1;
    }
}
