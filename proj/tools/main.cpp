/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "splatcurve/degrade.hpp"
#include "splatcurve/gradsuite.hpp"
#include "splatcurve/metrics.hpp"
#include "splatcurve/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace splatcurve;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// ---------- config files ----------

// Minimal TOML subset: [section] headers, key = value with string, bool,
// number, or flat numeric array values. Enough for the run configs this tool
// consumes; anything fancier should just use JSON.
json parse_toml_subset(std::istream& in, const std::string& path) {
    json root = json::object();
    json* section = &root;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fail = [&](const std::string& why) {
            throw DataError("config " + path + ":" + std::to_string(lineno) + ": " + why);
        };
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            std::size_t a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            std::size_t b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header");
            std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) fail("empty section name");
            section = &root[name];
            if (section->is_null()) *section = json::object();
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) fail("expected key = value");
        auto parse_scalar = [&](const std::string& v) -> json {
            if (v == "true") return true;
            if (v == "false") return false;
            if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
                return v.substr(1, v.size() - 2);
            }
            try {
                std::size_t used = 0;
                double d = std::stod(v, &used);
                if (used != v.size()) throw std::invalid_argument(v);
                return d;
            } catch (const std::exception&) {
                throw DataError("config " + path + ":" + std::to_string(lineno) +
                                ": unparsable value for key '" + key + "'");
            }
        };
        if (val.front() == '[') {
            if (val.back() != ']') fail("malformed array");
            json arr = json::array();
            std::stringstream ss(val.substr(1, val.size() - 2));
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (!item.empty()) arr.push_back(parse_scalar(item));
            }
            (*section)[key] = std::move(arr);
        } else {
            (*section)[key] = parse_scalar(val);
        }
    }
    return root;
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("config: cannot open " + path);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        try {
            json j;
            in >> j;
            return j;
        } catch (const json::parse_error& e) {
            throw DataError("config " + path + ": " + e.what());
        }
    }
    return parse_toml_subset(in, path);
}

// Fills `target` from config section/key when the CLI flag was not given.
template <typename T>
void config_override(const json& cfg, const std::string& section,
                     const std::string& key, const CLI::Option* opt, T& target) {
    if (opt != nullptr && opt->count() > 0) return;
    if (!cfg.contains(section) || !cfg[section].contains(key)) return;
    try {
        target = cfg[section][key].get<T>();
    } catch (const json::exception&) {
        throw DataError("config: bad value at " + section + "." + key);
    }
}

// ---------- manifests, file naming ----------

void write_manifest(const fs::path& outdir, const std::string& command,
                    const std::string& config_path, std::uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double seconds) {
    json j;
    j["command"] = command;
    j["config"] = config_path;
    j["seed"] = seed;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["tool_version"] = kToolVersion;
    j["duration_seconds"] = seconds;
    std::ofstream out(outdir / "manifest.json");
    if (!out) throw DataError("cannot write manifest in " + outdir.string());
    out << j.dump(2) << "\n";
}

std::string view_png(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "view_%03d.png", index);
    return buf;
}

std::vector<Image> load_view_images(const fs::path& dir, std::size_t count) {
    std::vector<Image> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(load_image((dir / view_png(static_cast<int>(i))).string()));
    }
    return out;
}

std::vector<fs::path> sorted_pngs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .png files in " + dir.string());
    return files;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

// ---------- subcommand payloads ----------

struct SynthArgs {
    std::string scene, profile = "none", outdir, config;
    std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& a) {
    Timer timer;
    Scene scene = load_scene(a.scene);
    if (scene.cameras.empty()) throw DataError("synth: scene has no cameras");
    DegradationProfile profile = parse_profile(a.profile);
    std::vector<DegradationParams> params =
        sample_scene_params(profile, a.seed, scene.cameras.size());

    fs::create_directories(fs::path(a.outdir) / "clean");
    fs::create_directories(fs::path(a.outdir) / "degraded");
    std::vector<std::string> outputs;
    json pj = json::array();
    for (std::size_t k = 0; k < scene.cameras.size(); ++k) {
        Image clean = render_base(scene.cloud, scene.cameras[k]);
        for (double& v : clean.data) v = std::min(1.0, std::max(0.0, v));
        Image degraded = apply_degradation(clean, params[k]);
        std::string cpath = (fs::path(a.outdir) / "clean" / view_png(static_cast<int>(k))).string();
        std::string dpath =
            (fs::path(a.outdir) / "degraded" / view_png(static_cast<int>(k))).string();
        save_image(clean, cpath);
        save_image(degraded, dpath);
        outputs.push_back(cpath);
        outputs.push_back(dpath);
        json row;
        row["view"] = k;
        row["mode"] = static_cast<int>(params[k].mode);
        row["exposure_scale"] = params[k].exposure_scale;
        row["gamma"] = params[k].gamma;
        row["temperature_k"] = params[k].temperature_k;
        row["brightness"] = params[k].brightness;
        row["contrast"] = params[k].contrast;
        pj.push_back(std::move(row));
    }
    {
        std::ofstream out(fs::path(a.outdir) / "degradation_params.json");
        out << pj.dump(2) << "\n";
    }
    write_manifest(a.outdir, "synth", a.config, a.seed, {a.scene}, outputs,
                   timer.seconds());
    return 0;
}

struct TrainArgs {
    std::string scene, data, outdir, config, resume, scenario = "lightness";
    int iterations = 5000;
    std::uint64_t seed = 0;
    double lambda = 0.2;
    bool baseline = false;
    bool geometry = false;
};

int run_train(const TrainArgs& a) {
    Timer timer;
    Scene scene = load_scene(a.scene);
    std::vector<Image> degraded = load_view_images(a.data, scene.cameras.size());
    fs::create_directories(a.outdir);

    std::unique_ptr<Trainer> trainer;
    if (!a.resume.empty()) {
        trainer = Trainer::load_checkpoint(a.resume, scene, std::move(degraded));
    } else {
        TrainConfig cfg;
        cfg.iterations = a.iterations;
        cfg.seed = a.seed;
        cfg.scenario = a.scenario;
        cfg.lambda = a.lambda;
        cfg.baseline = a.baseline;
        cfg.optimize_geometry = a.geometry;
        trainer = std::make_unique<Trainer>(scene, std::move(degraded), cfg);
    }
    trainer->run();

    std::string ckpt = (fs::path(a.outdir) / "checkpoint.json").string();
    std::string log = (fs::path(a.outdir) / "loss_log.csv").string();
    trainer->save_checkpoint(ckpt);
    trainer->save_loss_log(log);
    {
        std::ofstream out(fs::path(a.outdir) / "config_echo.json");
        json j;
        j["iterations"] = trainer->config().iterations;
        j["seed"] = trainer->config().seed;
        j["scenario"] = trainer->config().scenario;
        j["baseline"] = trainer->config().baseline;
        j["lambda"] = trainer->config().lambda;
        out << j.dump(2) << "\n";
    }
    write_manifest(a.outdir, "train", a.config, trainer->config().seed,
                   {a.scene, a.data}, {ckpt, log}, timer.seconds());
    return 0;
}

struct RenderArgs {
    std::string scene, data, checkpoint, outdir, config;
    bool dump_residual = false;
    bool base_colors = false;
};

int run_render(const RenderArgs& a) {
    Timer timer;
    Scene scene = load_scene(a.scene);
    std::vector<Image> degraded = load_view_images(a.data, scene.cameras.size());
    auto trainer = Trainer::load_checkpoint(a.checkpoint, scene, std::move(degraded));
    fs::create_directories(a.outdir);
    std::vector<std::string> outputs;
    for (std::size_t k = 0; k < scene.cameras.size(); ++k) {
        Image img = a.base_colors ? trainer->render_view_base(scene.cameras[k])
                                  : trainer->render_view(scene.cameras[k]);
        std::string path = (fs::path(a.outdir) / view_png(static_cast<int>(k))).string();
        save_image(img, path);
        outputs.push_back(path);
    }
    if (a.dump_residual) {
        for (std::size_t k = 0; k < trainer->num_views(); ++k) {
            Image res = trainer->residual_map(k);
            for (double& v : res.data) v = std::min(1.0, std::max(0.0, v + 0.5));
            std::string path =
                (fs::path(a.outdir) / ("residual_" + view_png(static_cast<int>(k)))).string();
            save_image(res, path);
            outputs.push_back(path);
        }
    }
    write_manifest(a.outdir, "render", a.config, trainer->config().seed,
                   {a.scene, a.data, a.checkpoint}, outputs, timer.seconds());
    return 0;
}

struct EvalArgs {
    std::string renders, gt, out_csv, config;
};

int run_eval(const EvalArgs& a) {
    std::vector<fs::path> rfiles = sorted_pngs(a.renders);
    std::vector<fs::path> gfiles = sorted_pngs(a.gt);
    if (rfiles.size() != gfiles.size()) {
        throw DataError("eval: directories hold different view counts");
    }
    std::vector<Image> renders;
    double psnr_sum = 0, ssim_sum = 0;
    std::ostringstream csv;
    csv << "view_id,psnr,ssim\n";
    for (std::size_t i = 0; i < rfiles.size(); ++i) {
        Image r = load_image(rfiles[i].string());
        Image g = load_image(gfiles[i].string());
        double p = psnr(r, g);
        double s = ssim(r, g);
        psnr_sum += p;
        ssim_sum += s;
        csv << i << "," << p << "," << s << "\n";
        renders.push_back(std::move(r));
    }
    double n = static_cast<double>(rfiles.size());
    csv << "mean," << psnr_sum / n << "," << ssim_sum / n << "\n";
    if (renders.size() >= 2) {
        ChromaDispersion d = chroma_dispersion(renders);
        csv << "chroma_dispersion_ab," << d.pooled << ",\n";
    }
    std::fputs(csv.str().c_str(), stdout);
    if (!a.out_csv.empty()) {
        std::ofstream out(a.out_csv);
        if (!out) throw DataError("eval: cannot write " + a.out_csv);
        out << csv.str();
    }
    return 0;
}

int run_gradcheck() {
    std::vector<GradReport> reports = run_gradient_suite();
    bool all_pass = true;
    std::printf("op,max_rel_err,pass\n");
    for (const GradReport& r : reports) {
        std::printf("%s,%.3e,%s\n", r.op_name.c_str(), r.max_rel_err,
                    r.pass ? "true" : "false");
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 3;
}

struct ExportCurvesArgs {
    std::string scene, data, checkpoint, outdir, config;
};

int run_export_curves(const ExportCurvesArgs& a) {
    Timer timer;
    Scene scene = load_scene(a.scene);
    std::vector<Image> degraded = load_view_images(a.data, scene.cameras.size());
    auto trainer = Trainer::load_checkpoint(a.checkpoint, scene, std::move(degraded));
    fs::create_directories(a.outdir);
    ToneCurve global = trainer->global_curve();
    std::vector<std::string> outputs;
    for (std::size_t k = 0; k < trainer->num_views(); ++k) {
        ToneCurve total = trainer->view_curve(k);
        char name[48];
        std::snprintf(name, sizeof(name), "curves_view_%03d.csv", static_cast<int>(k));
        std::string path = (fs::path(a.outdir) / name).string();
        std::ofstream out(path);
        if (!out) throw DataError("export-curves: cannot write " + path);
        out << "index,global,bias,total\n";
        for (int i = 0; i < 256; ++i) {
            out << i << "," << global.entries[i] << ","
                << total.entries[i] - global.entries[i] << "," << total.entries[i]
                << "\n";
        }
        outputs.push_back(path);
    }
    write_manifest(a.outdir, "export-curves", a.config, trainer->config().seed,
                   {a.scene, a.data, a.checkpoint}, outputs, timer.seconds());
    return 0;
}

struct MakeSceneArgs {
    std::string out, config;
    int gaussians = 30;
    int views = 10;
    int size = 64;
    std::uint64_t seed = 0;
};

int run_make_scene(const MakeSceneArgs& a) {
    if (a.gaussians < 1 || a.views < 1 || a.size < 1) {
        throw UsageError("make-scene: counts must be positive");
    }
    std::mt19937_64 rng(a.seed);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Scene scene;
    for (int i = 0; i < a.gaussians; ++i) {
        Gaussian g;
        for (int c = 0; c < 3; ++c) {
            g.mu[c] = 1.6 * (u() - 0.5);
            g.log_scales[c] = std::log(0.08 + 0.17 * u());
            g.color[c] = 0.15 + 0.75 * u();
        }
        double q[4] = {1.0 + u(), u() - 0.5, u() - 0.5, u() - 0.5};
        double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        for (int c = 0; c < 4; ++c) g.quat[c] = q[c] / qn;
        g.opacity_logit = -0.5 + 2.0 * u();
        scene.cloud.gaussians.push_back(g);
    }
    for (int k = 0; k < a.views; ++k) {
        double theta = 2.0 * M_PI * k / a.views;
        double r = 2.6;
        double px = r * std::sin(theta);
        double py = 0.5 + 0.25 * std::sin(3.0 * theta);
        double pz = r * std::cos(theta);
        double f[3] = {-px, -py, -pz};
        double fn = std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
        for (double& v : f) v /= fn;
        double up[3] = {0, 1, 0};
        double x[3] = {up[1] * f[2] - up[2] * f[1], up[2] * f[0] - up[0] * f[2],
                       up[0] * f[1] - up[1] * f[0]};
        double xn = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        for (double& v : x) v /= xn;
        double y[3] = {f[1] * x[2] - f[2] * x[1], f[2] * x[0] - f[0] * x[2],
                       f[0] * x[1] - f[1] * x[0]};
        Camera cam;
        cam.fx = cam.fy = static_cast<double>(a.size);
        cam.cx = cam.cy = a.size / 2.0;
        cam.width = cam.height = static_cast<std::size_t>(a.size);
        double p[3] = {px, py, pz};
        double rows[3][3] = {{x[0], x[1], x[2]}, {y[0], y[1], y[2]}, {f[0], f[1], f[2]}};
        for (int rI = 0; rI < 3; ++rI) {
            double tr = 0.0;
            for (int c = 0; c < 3; ++c) {
                cam.world_to_camera[4 * rI + c] = rows[rI][c];
                tr += rows[rI][c] * p[c];
            }
            cam.world_to_camera[4 * rI + 3] = -tr;
        }
        cam.world_to_camera[15] = 1.0;
        cam.view_id = k;
        validate_camera(cam);
        scene.cameras.push_back(cam);
    }
    save_scene(scene, a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curve-based view-adaptive correction for Gaussian-splat scenes"};
    app.require_subcommand(1);

    std::string config_path;

    SynthArgs synth;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "Render clean views and write a degraded dataset");
    synth_cmd->add_option("--config", config_path, "Config file (JSON or TOML)");
    auto* so_scene = synth_cmd->add_option("--scene", synth.scene, "Scene JSON file");
    auto* so_profile = synth_cmd->add_option(
        "--profile", synth.profile,
        "none|low-light-like|overexposure-like|varying|cool|warm|mixed-temp|mixed-all");
    auto* so_seed = synth_cmd->add_option("--seed", synth.seed, "Sampling seed");
    auto* so_out = synth_cmd->add_option("--out", synth.outdir, "Output directory");

    TrainArgs train;
    CLI::App* train_cmd = app.add_subcommand("train", "Optimize a scene on degraded views");
    train_cmd->add_option("--config", config_path, "Config file (JSON or TOML)");
    auto* to_scene = train_cmd->add_option("--scene", train.scene, "Scene JSON file");
    auto* to_data = train_cmd->add_option("--data", train.data,
                                          "Directory of degraded view_NNN.png images");
    auto* to_out = train_cmd->add_option("--out", train.outdir, "Output directory");
    auto* to_iters = train_cmd->add_option("--iterations", train.iterations, "Adam steps");
    auto* to_seed = train_cmd->add_option("--seed", train.seed, "Init seed");
    auto* to_scenario =
        train_cmd->add_option("--scenario", train.scenario, "lightness|color|mixed");
    auto* to_lambda = train_cmd->add_option("--lambda", train.lambda, "DSSIM mix weight");
    auto* to_baseline = train_cmd->add_flag("--baseline", train.baseline,
                                            "Dual-free baseline (no adjustment modules)");
    auto* to_geom = train_cmd->add_flag("--geometry", train.geometry,
                                        "Also optimize Gaussian geometry");
    train_cmd->add_option("--resume", train.resume, "Checkpoint to resume from");

    RenderArgs render;
    CLI::App* render_cmd = app.add_subcommand("render", "Render views from a checkpoint");
    render_cmd->add_option("--config", config_path, "Config file (JSON or TOML)");
    render_cmd->add_option("--scene", render.scene, "Scene JSON file")->required();
    render_cmd->add_option("--data", render.data, "Degraded training images")->required();
    render_cmd->add_option("--checkpoint", render.checkpoint, "Checkpoint file")
        ->required();
    render_cmd->add_option("--out", render.outdir, "Output directory")->required();
    render_cmd->add_flag("--dump-residual", render.dump_residual,
                         "Also write residual maps (mid-gray offset)");
    render_cmd->add_flag("--base", render.base_colors, "Render base colors instead");

    EvalArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM of renders vs ground truth");
    eval_cmd->add_option("--config", config_path, "Config file (JSON or TOML)");
    eval_cmd->add_option("--renders", eval.renders, "Directory of rendered PNGs")
        ->required();
    eval_cmd->add_option("--gt", eval.gt, "Directory of clean ground-truth PNGs")
        ->required();
    eval_cmd->add_option("--out", eval.out_csv, "Optional CSV output path");

    CLI::App* grad_cmd =
        app.add_subcommand("gradcheck", "Finite-difference check of every op");

    ExportCurvesArgs exportc;
    CLI::App* export_cmd =
        app.add_subcommand("export-curves", "Write learned tone curves as CSV");
    export_cmd->add_option("--config", config_path, "Config file (JSON or TOML)");
    export_cmd->add_option("--scene", exportc.scene, "Scene JSON file")->required();
    export_cmd->add_option("--data", exportc.data, "Degraded training images")->required();
    export_cmd->add_option("--checkpoint", exportc.checkpoint, "Checkpoint file")
        ->required();
    export_cmd->add_option("--out", exportc.outdir, "Output directory")->required();

    MakeSceneArgs mk;
    CLI::App* mk_cmd = app.add_subcommand("make-scene", "Generate a synthetic test scene");
    mk_cmd->add_option("--out", mk.out, "Scene JSON output path")->required();
    mk_cmd->add_option("--gaussians", mk.gaussians, "Number of Gaussians");
    mk_cmd->add_option("--views", mk.views, "Number of cameras");
    mk_cmd->add_option("--size", mk.size, "Image width/height in pixels");
    mk_cmd->add_option("--seed", mk.seed, "Sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        json cfg = json::object();
        if (!config_path.empty()) cfg = load_config(config_path);

        if (synth_cmd->parsed()) {
            config_override(cfg, "scene", "path", so_scene, synth.scene);
            config_override(cfg, "degrade", "profile", so_profile, synth.profile);
            double seed_d = static_cast<double>(synth.seed);
            config_override(cfg, "degrade", "seed", so_seed, seed_d);
            synth.seed = static_cast<std::uint64_t>(seed_d);
            config_override(cfg, "degrade", "out", so_out, synth.outdir);
            if (synth.scene.empty() || synth.outdir.empty()) {
                throw UsageError("synth: --scene and --out are required");
            }
            synth.config = config_path;
            return run_synth(synth);
        }
        if (train_cmd->parsed()) {
            config_override(cfg, "scene", "path", to_scene, train.scene);
            config_override(cfg, "train", "data", to_data, train.data);
            config_override(cfg, "train", "out", to_out, train.outdir);
            double it_d = train.iterations;
            config_override(cfg, "train", "iterations", to_iters, it_d);
            train.iterations = static_cast<int>(it_d);
            double seed_d = static_cast<double>(train.seed);
            config_override(cfg, "train", "seed", to_seed, seed_d);
            train.seed = static_cast<std::uint64_t>(seed_d);
            config_override(cfg, "train", "scenario", to_scenario, train.scenario);
            config_override(cfg, "train", "lambda", to_lambda, train.lambda);
            config_override(cfg, "train", "baseline", to_baseline, train.baseline);
            config_override(cfg, "train", "geometry", to_geom, train.geometry);
            if (train.scene.empty() || train.data.empty() || train.outdir.empty()) {
                throw UsageError("train: --scene, --data and --out are required");
            }
            train.config = config_path;
            return run_train(train);
        }
        if (render_cmd->parsed()) {
            render.config = config_path;
            return run_render(render);
        }
        if (eval_cmd->parsed()) {
            eval.config = config_path;
            return run_eval(eval);
        }
        if (grad_cmd->parsed()) return run_gradcheck();
        if (export_cmd->parsed()) {
            exportc.config = config_path;
            return run_export_curves(exportc);
        }
        if (mk_cmd->parsed()) {
            mk.config = config_path;
            return run_make_scene(mk);
        }
        return 1;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
