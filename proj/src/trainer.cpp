/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "splatcurve/metrics.hpp"

#include <json.hpp>

namespace splatcurve {

using nlohmann::json;

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void check_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw NumericError(std::string("non-finite loss component: ") + name);
    }
}

json config_to_json(const TrainConfig& c) {
    json j;
    j["iterations"] = c.iterations;
    j["seed"] = c.seed;
    j["scenario"] = c.scenario;
    j["lambda"] = c.lambda;
    j["omega_switch_iter"] = c.omega_switch_iter;
    j["optimize_geometry"] = c.optimize_geometry;
    j["baseline"] = c.baseline;
    j["reset_colors"] = c.reset_colors;
    j["background"] = c.background;
    j["lr_colors"] = c.lr_colors;
    j["lr_opacity"] = c.lr_opacity;
    j["lr_ab"] = c.lr_ab;
    j["lr_lut"] = c.lr_lut;
    j["lr_matrix"] = c.lr_matrix;
    j["lr_net"] = c.lr_net;
    j["lr_geometry"] = c.lr_geometry;
    j["eta_override"] = c.eta_override;
    return j;
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.iterations = j.at("iterations").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.scenario = j.at("scenario").get<std::string>();
    c.lambda = j.at("lambda").get<double>();
    c.omega_switch_iter = j.at("omega_switch_iter").get<int>();
    c.optimize_geometry = j.at("optimize_geometry").get<bool>();
    c.baseline = j.at("baseline").get<bool>();
    c.reset_colors = j.at("reset_colors").get<bool>();
    auto bg = j.at("background").get<std::vector<double>>();
    c.background = {bg[0], bg[1], bg[2]};
    c.lr_colors = j.at("lr_colors").get<double>();
    c.lr_opacity = j.at("lr_opacity").get<double>();
    c.lr_ab = j.at("lr_ab").get<double>();
    c.lr_lut = j.at("lr_lut").get<double>();
    c.lr_matrix = j.at("lr_matrix").get<double>();
    c.lr_net = j.at("lr_net").get<double>();
    c.lr_geometry = j.at("lr_geometry").get<double>();
    c.eta_override = j.at("eta_override").get<double>();
    return c;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

Trainer::Trainer(const Scene& scene, std::vector<Image> degraded_inputs, TrainConfig cfg)
    : cfg_(std::move(cfg)), geometry_(scene.cloud) {
    if (scene.cameras.empty()) throw DataError("trainer: scene has no cameras");
    if (degraded_inputs.size() != scene.cameras.size()) {
        throw DataError("trainer: view/image count mismatch");
    }
    if (cfg_.iterations < 1) throw UsageError("trainer: iterations must be >= 1");
    if (cfg_.scenario != "lightness" && cfg_.scenario != "color" &&
        cfg_.scenario != "mixed") {
        throw UsageError("trainer: unknown scenario " + cfg_.scenario);
    }

    std::size_t n = scene.cloud.gaussians.size();
    Vec colors(3 * n), gains(3 * n), offsets(3 * n), logits(n);
    Vec mu(3 * n), ls(3 * n), quats(4 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const Gaussian& g = scene.cloud.gaussians[i];
        for (int c = 0; c < 3; ++c) {
            colors[3 * i + c] = cfg_.reset_colors ? 0.5 : g.color[c];
            gains[3 * i + c] = 1.0;
            offsets[3 * i + c] = 0.0;
            mu[3 * i + c] = g.mu[c];
            ls[3 * i + c] = g.log_scales[c];
        }
        for (int c = 0; c < 4; ++c) quats[4 * i + c] = g.quat[c];
        logits[i] = g.opacity_logit;
    }
    colors_ = Parameter("colors", std::move(colors));
    gains_ = Parameter("gains", std::move(gains));
    offsets_ = Parameter("offsets", std::move(offsets));
    logits_ = Parameter("logits", std::move(logits));
    mu_ = Parameter("mu", std::move(mu));
    log_scales_ = Parameter("log_scales", std::move(ls));
    quats_ = Parameter("quats", std::move(quats));
    lut_g_ = Parameter("lut_g", ToneCurve::identity().to_vec());
    curve_gen_ = GeneratorWeights::init(256, cfg_.seed * 2654435761u + 1, "curve_gen");
    scalar_gen_ = GeneratorWeights::init(4, cfg_.seed * 2654435761u + 2, "scalar_gen");
    residual_ = ResidualWeights::init(cfg_.residual_clip(), cfg_.seed * 2654435761u + 3);

    for (std::size_t k = 0; k < scene.cameras.size(); ++k) {
        const Camera& cam = scene.cameras[k];
        const Image& img = degraded_inputs[k];
        if (img.width != cam.width || img.height != cam.height) {
            throw DataError("trainer: image size does not match camera");
        }
        Mat3 id = identity3();
        ViewState v{img, cam,
                    Parameter("view" + std::to_string(k) + ".matrix",
                              Vec(id.begin(), id.end())),
                    cdf_curve(img).to_vec()};
        views_.push_back(std::move(v));
    }
    build_groups();
}

void Trainer::build_groups() {
    auto mk = [&](std::string name, double lr, std::vector<Parameter*> ps,
                  bool guarded = false) {
        Group g;
        g.name = std::move(name);
        g.lr = lr;
        g.params = std::move(ps);
        for (Parameter* p : g.params) {
            g.states.push_back({Vec(p->value.size(), 0.0), Vec(p->value.size(), 0.0)});
        }
        g.det_guarded = guarded;
        groups_.push_back(std::move(g));
    };
    mk("colors", cfg_.lr_colors, {&colors_});
    mk("opacity", cfg_.lr_opacity, {&logits_});
    if (!cfg_.baseline) {
        mk("ab", cfg_.lr_ab, {&gains_, &offsets_});
        mk("lut", cfg_.lr_lut, {&lut_g_});
        std::vector<Parameter*> mats;
        for (ViewState& v : views_) mats.push_back(&v.matrix);
        mk("matrices", cfg_.lr_matrix, std::move(mats), true);
        std::vector<Parameter*> net = curve_gen_.all();
        for (Parameter* p : scalar_gen_.all()) net.push_back(p);
        for (Parameter* p : residual_.all()) net.push_back(p);
        mk("net", cfg_.lr_net, std::move(net));
    }
    if (cfg_.optimize_geometry) {
        mk("geometry", cfg_.lr_geometry, {&mu_, &log_scales_, &quats_});
    }
}

LossRow Trainer::step_baseline(std::size_t view) {
    ViewState& vs = views_[view];
    Tape t;
    ParamSet ps(t);
    RenderVars rv;
    rv.colors = ps.bind(colors_);
    rv.gains = ps.bind(gains_);
    rv.offsets = ps.bind(offsets_);
    rv.logits = ps.bind(logits_);
    if (cfg_.optimize_geometry) {
        rv.mu = ps.bind(mu_);
        rv.log_scales = ps.bind(log_scales_);
        rv.quats = ps.bind(quats_);
    }
    Var pair = render_dual_node(t, geometry_, vs.cam, rv, cfg_.background);
    std::size_t sz = vs.cam.width * vs.cam.height * 3;
    Var chat_in = slice(t, pair, 0, sz);
    Var input = t.leaf(vs.input.data);
    Var loss = loss_3dgs_node(t, chat_in, input, vs.cam.height, vs.cam.width,
                              cfg_.lambda);
    LossRow row;
    row.iter = iter_;
    row.reg = t.scalar(loss);
    row.total = row.reg;
    check_finite(row.total, "reg");
    ps.backward(loss);
    return row;
}

LossRow Trainer::step_full(std::size_t view) {
    ViewState& vs = views_[view];
    std::size_t h = vs.cam.height, w = vs.cam.width;
    Tape t;
    ParamSet ps(t);

    RenderVars rv;
    rv.colors = ps.bind(colors_);
    rv.gains = ps.bind(gains_);
    rv.offsets = ps.bind(offsets_);
    rv.logits = ps.bind(logits_);
    if (cfg_.optimize_geometry) {
        rv.mu = ps.bind(mu_);
        rv.log_scales = ps.bind(log_scales_);
        rv.quats = ps.bind(quats_);
    }
    Var lut_g = ps.bind(lut_g_);
    Var m = ps.bind(vs.matrix);
    GeneratorVars cgv = bind_generator(ps, curve_gen_);
    GeneratorVars sgv = bind_generator(ps, scalar_gen_);
    ResidualVars resv = bind_residual(ps, residual_);

    Var input = t.leaf(vs.input.data);
    Var bias = generator_forward(t, cgv, vs.input, vs.cam.world_to_camera, 256);
    Var curve = add(t, lut_g, bias);
    Var raw = generator_forward(t, sgv, vs.input, vs.cam.world_to_camera, 4);
    ViewScalarVars sc = squash_view_scalars(t, raw);
    Var prior_po = power_curve_node(t, sc.g_power);
    Var prior_s = s_curve_node(t, sc.a_pivot, sc.b_exponent);

    Var label = pseudo_enhance_node(t, input, h, w, m, curve, resv,
                                    cfg_.residual_clip());

    Var pair = render_dual_node(t, geometry_, vs.cam, rv, cfg_.background);
    std::size_t sz = h * w * 3;
    Var chat_in = slice(t, pair, 0, sz);
    Var chat_out = slice(t, pair, sz, sz);

    Var reg = loss_reg_node(t, chat_in, input, chat_out, label, h, w, cfg_.lambda);
    Var spa = loss_spa_node(t, chat_out, vs.input, h, w);
    Var tv = loss_tv_node(t, curve);
    Var curve_loss = loss_curve_node(t, curve, vs.cdf, prior_po, prior_s,
                                     cfg_.omega_at(iter_));
    Var cc = loss_cc_view_node(t, chat_out, sc.s_minkowski, h, w);
    Var total = loss_total_node(t, reg, spa, tv, curve_loss, cc, cfg_.eta());

    LossRow row;
    row.iter = iter_;
    row.reg = t.scalar(reg);
    row.spa = t.scalar(spa);
    row.tv = t.scalar(tv);
    row.curve = t.scalar(curve_loss);
    row.cc = t.scalar(cc);
    row.total = t.scalar(total);
    check_finite(row.reg, "reg");
    check_finite(row.spa, "spa");
    check_finite(row.tv, "tv");
    check_finite(row.curve, "curve");
    check_finite(row.cc, "cc");
    check_finite(row.total, "total");

    ps.backward(total);
    return row;
}

void Trainer::step() {
    std::size_t view = static_cast<std::size_t>(iter_) % views_.size();
    for (Group& g : groups_) {
        for (Parameter* p : g.params) p->zero_grad();
    }
    LossRow row = cfg_.baseline ? step_baseline(view) : step_full(view);
    adam_update();
    log_.push_back(row);
    ++iter_;
}

void Trainer::adam_update() {
    ++adam_t_;
    double bc1 = 1.0 - std::pow(kBeta1, adam_t_);
    double bc2 = 1.0 - std::pow(kBeta2, adam_t_);
    for (Group& g : groups_) {
        for (std::size_t pi = 0; pi < g.params.size(); ++pi) {
            Parameter& p = *g.params[pi];
            AdamState& st = g.states[pi];
            Vec old_value;
            if (g.det_guarded) old_value = p.value;
            for (std::size_t i = 0; i < p.value.size(); ++i) {
                st.m[i] = kBeta1 * st.m[i] + (1.0 - kBeta1) * p.grad[i];
                st.v[i] = kBeta2 * st.v[i] + (1.0 - kBeta2) * p.grad[i] * p.grad[i];
                double mhat = st.m[i] / bc1;
                double vhat = st.v[i] / bc2;
                p.value[i] -= g.lr * mhat / (std::sqrt(vhat) + kAdamEps);
            }
            if (g.det_guarded) {
                Mat3 m;
                std::copy(p.value.begin(), p.value.end(), m.begin());
                if (std::abs(det3(m)) < kDetGuard) p.value = old_value;
            }
        }
    }
}

void Trainer::run() {
    while (iter_ < cfg_.iterations) step();
}

GaussianCloud Trainer::current_cloud() const {
    GaussianCloud cloud = geometry_;
    for (std::size_t i = 0; i < cloud.gaussians.size(); ++i) {
        Gaussian& g = cloud.gaussians[i];
        for (int c = 0; c < 3; ++c) {
            g.color[c] = colors_.value[3 * i + c];
            g.gain[c] = gains_.value[3 * i + c];
            g.offset[c] = offsets_.value[3 * i + c];
            g.mu[c] = mu_.value[3 * i + c];
            g.log_scales[c] = log_scales_.value[3 * i + c];
        }
        for (int c = 0; c < 4; ++c) g.quat[c] = quats_.value[4 * i + c];
        g.opacity_logit = logits_.value[i];
    }
    return cloud;
}

Image Trainer::render_view(const Camera& cam) const {
    validate_camera(cam);
    Image out = render_adjusted(current_cloud(), cam, cfg_.background);
    for (double& v : out.data) v = std::min(1.0, std::max(0.0, v));
    return out;
}

Image Trainer::render_view_base(const Camera& cam) const {
    validate_camera(cam);
    Image out = render_base(current_cloud(), cam, cfg_.background);
    for (double& v : out.data) v = std::min(1.0, std::max(0.0, v));
    return out;
}

ToneCurve Trainer::global_curve() const { return ToneCurve::from_vec(lut_g_.value); }

Mat3 Trainer::view_matrix(std::size_t view) const {
    Mat3 m;
    std::copy(views_.at(view).matrix.value.begin(), views_.at(view).matrix.value.end(),
              m.begin());
    return m;
}

ToneCurve Trainer::view_curve(std::size_t view) {
    ViewState& vs = views_.at(view);
    Tape t;
    ParamSet ps(t);
    Var lut_g = ps.bind(lut_g_);
    GeneratorVars cgv = bind_generator(ps, curve_gen_);
    Var bias = generator_forward(t, cgv, vs.input, vs.cam.world_to_camera, 256);
    Var curve = add(t, lut_g, bias);
    return ToneCurve::from_vec(t.val(curve));
}

Image Trainer::pseudo_label(std::size_t view) {
    ViewState& vs = views_.at(view);
    Tape t;
    ParamSet ps(t);
    Var lut_g = ps.bind(lut_g_);
    Var m = ps.bind(vs.matrix);
    GeneratorVars cgv = bind_generator(ps, curve_gen_);
    ResidualVars resv = bind_residual(ps, residual_);
    Var input = t.leaf(vs.input.data);
    Var bias = generator_forward(t, cgv, vs.input, vs.cam.world_to_camera, 256);
    Var curve = add(t, lut_g, bias);
    Var label = pseudo_enhance_node(t, input, vs.cam.height, vs.cam.width, m, curve,
                                    resv, cfg_.residual_clip());
    Image out(vs.cam.width, vs.cam.height);
    out.data = t.val(label);
    return out;
}

Image Trainer::residual_map(std::size_t view) {
    ViewState& vs = views_.at(view);
    Tape t;
    ParamSet ps(t);
    ResidualVars resv = bind_residual(ps, residual_);
    Var input = t.leaf(vs.input.data);
    Var res = residual_forward(t, resv, input, vs.cam.height, vs.cam.width,
                               cfg_.residual_clip());
    Image out(vs.cam.width, vs.cam.height);
    out.data = t.val(res);
    return out;
}

std::vector<EvalRow> Trainer::evaluate(const std::vector<Camera>& cams,
                                       const std::vector<Image>& clean_gt) const {
    if (cams.size() != clean_gt.size()) throw UsageError("evaluate: length mismatch");
    std::vector<EvalRow> rows;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        Image r = render_view(cams[i]);
        rows.push_back({cams[i].view_id, psnr(r, clean_gt[i]), ssim(r, clean_gt[i])});
    }
    return rows;
}

void Trainer::save_checkpoint(const std::string& path) const {
    json j;
    j["version"] = 1;
    j["iteration"] = iter_;
    j["adam_t"] = adam_t_;
    json cfg = config_to_json(cfg_);
    j["config"] = cfg;
    j["config_hash"] = fnv1a(cfg.dump());

    json params = json::object();
    auto dump_param = [&](const Parameter& p) { params[p.name]["value"] = p.value; };
    dump_param(colors_);
    dump_param(gains_);
    dump_param(offsets_);
    dump_param(logits_);
    dump_param(mu_);
    dump_param(log_scales_);
    dump_param(quats_);
    dump_param(lut_g_);
    for (const Parameter* p : const_cast<GeneratorWeights&>(curve_gen_).all()) {
        dump_param(*p);
    }
    for (const Parameter* p : const_cast<GeneratorWeights&>(scalar_gen_).all()) {
        dump_param(*p);
    }
    for (const Parameter* p : const_cast<ResidualWeights&>(residual_).all()) {
        dump_param(*p);
    }
    for (const ViewState& v : views_) dump_param(v.matrix);
    j["params"] = std::move(params);

    json moments = json::object();
    for (const Group& g : groups_) {
        for (std::size_t pi = 0; pi < g.params.size(); ++pi) {
            moments[g.params[pi]->name]["m"] = g.states[pi].m;
            moments[g.params[pi]->name]["v"] = g.states[pi].v;
        }
    }
    j["moments"] = std::move(moments);

    json cdfs = json::array();
    for (const ViewState& v : views_) cdfs.push_back(v.cdf);
    j["view_cdfs"] = std::move(cdfs);

    json log = json::array();
    for (const LossRow& r : log_) {
        log.push_back({r.iter, r.reg, r.spa, r.tv, r.curve, r.cc, r.total});
    }
    j["loss_log"] = std::move(log);

    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("checkpoint: cannot write " + tmp);
        out << j.dump() << "\n";
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw DataError("checkpoint: cannot rename into " + path);
    }
}

std::unique_ptr<Trainer> Trainer::load_checkpoint(const std::string& path,
                                                  const Scene& scene,
                                                  std::vector<Image> degraded_inputs) {
    std::ifstream in(path);
    if (!in) throw DataError("checkpoint: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw DataError(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    if (j.at("version").get<int>() != 1) throw DataError("checkpoint: unknown version");
    TrainConfig cfg = config_from_json(j.at("config"));
    if (j.at("config_hash").get<std::uint64_t>() != fnv1a(j.at("config").dump())) {
        throw DataError("checkpoint: config hash mismatch");
    }

    auto trp = std::make_unique<Trainer>(scene, std::move(degraded_inputs), cfg);
    Trainer& tr = *trp;
    tr.iter_ = j.at("iteration").get<int>();
    tr.adam_t_ = j.at("adam_t").get<int>();

    std::vector<Parameter*> params = {&tr.colors_,     &tr.gains_, &tr.offsets_,
                                      &tr.logits_,     &tr.mu_,    &tr.log_scales_,
                                      &tr.quats_,      &tr.lut_g_};
    for (Parameter* p : tr.curve_gen_.all()) params.push_back(p);
    for (Parameter* p : tr.scalar_gen_.all()) params.push_back(p);
    for (Parameter* p : tr.residual_.all()) params.push_back(p);
    for (ViewState& v : tr.views_) params.push_back(&v.matrix);

    const json& jp = j.at("params");
    for (Parameter* p : params) {
        if (!jp.contains(p->name)) throw DataError("checkpoint: missing param " + p->name);
        Vec v = jp.at(p->name).at("value").get<Vec>();
        if (v.size() != p->value.size()) {
            throw DataError("checkpoint: size mismatch for " + p->name);
        }
        p->value = std::move(v);
    }
    const json& jm = j.at("moments");
    for (Group& g : tr.groups_) {
        for (std::size_t pi = 0; pi < g.params.size(); ++pi) {
            const std::string& name = g.params[pi]->name;
            if (!jm.contains(name)) throw DataError("checkpoint: missing moments " + name);
            g.states[pi].m = jm.at(name).at("m").get<Vec>();
            g.states[pi].v = jm.at(name).at("v").get<Vec>();
        }
    }
    const json& jc = j.at("view_cdfs");
    for (std::size_t k = 0; k < tr.views_.size(); ++k) {
        tr.views_[k].cdf = jc.at(k).get<Vec>();
    }
    tr.log_.clear();
    for (const json& r : j.at("loss_log")) {
        tr.log_.push_back({r[0].get<int>(), r[1].get<double>(), r[2].get<double>(),
                           r[3].get<double>(), r[4].get<double>(), r[5].get<double>(),
                           r[6].get<double>()});
    }
    return trp;
}

void Trainer::save_loss_log(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("loss log: cannot write " + path);
    out << "iter,reg,spa,tv,curve,cc,total\n";
    char buf[256];
    for (const LossRow& r : log_) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.iter, r.reg, r.spa, r.tv, r.curve, r.cc, r.total);
        out << buf;
    }
}

}  // namespace splatcurve
