/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#pragma once

#include <memory>
#include <string>

#include "splatcurve/colorxform.hpp"
#include "splatcurve/gaussians.hpp"
#include "splatcurve/generators.hpp"
#include "splatcurve/image.hpp"
#include "splatcurve/losses.hpp"
#include "splatcurve/renderer.hpp"
#include "splatcurve/residual.hpp"

namespace splatcurve {

struct TrainConfig {
    int iterations = 5000;
    std::uint64_t seed = 0;
    std::string scenario = "lightness";  // lightness | color | mixed
    double lambda = 0.2;
    int omega_switch_iter = 3000;  // omega 1.0 before, 0.1 at and after
    bool optimize_geometry = false;
    bool baseline = false;  // dual-free: fit base colors/opacity to the inputs
    bool reset_colors = true;  // overwrite scene colors with 0.5 at start
    std::array<double, 3> background{0, 0, 0};

    double lr_colors = 2.5e-3;
    double lr_opacity = 2.5e-2;
    double lr_ab = 1e-3;
    double lr_lut = 5e-3;
    double lr_matrix = 1e-3;
    double lr_net = 1e-4;
    double lr_geometry = 1e-4;

    double eta_override = -1.0;  // >= 0 replaces the scenario-derived value

    double eta() const {
        if (eta_override >= 0.0) return eta_override;
        return scenario == "lightness" ? 0.005 : 0.1;
    }
    double residual_clip() const { return scenario == "lightness" ? 0.1 : 0.5; }
    double omega_at(int iter) const { return iter < omega_switch_iter ? 1.0 : 0.1; }
};

struct LossRow {
    int iter = 0;
    double reg = 0, spa = 0, tv = 0, curve = 0, cc = 0, total = 0;
};

struct EvalRow {
    int view_id = -1;
    double psnr = 0, ssim = 0;
};

/// Joint optimizer for the splat scene, global/per-view adjustment modules
/// and the residual branch. One view per iteration, round-robin; Adam
/// (beta 0.9/0.999, eps 1e-8) per parameter group; deterministic for a fixed
/// seed and build.
class Trainer {
public:
    Trainer(const Scene& scene, std::vector<Image> degraded_inputs, TrainConfig cfg);
    // Parameter groups hold pointers into this object.
    Trainer(const Trainer&) = delete;
    Trainer& operator=(const Trainer&) = delete;

    void step();
    void run();  // remaining iterations up to cfg.iterations

    int iteration() const { return iter_; }
    const TrainConfig& config() const { return cfg_; }
    const std::vector<LossRow>& loss_log() const { return log_; }
    std::size_t num_views() const { return views_.size(); }

    /// Cloud with the learned attributes written back into the Gaussians.
    GaussianCloud current_cloud() const;

    /// Novel-view render: adjusted colors only, no per-view modules.
    Image render_view(const Camera& cam) const;
    /// Render with the base (unadjusted) colors, for the baseline comparison.
    Image render_view_base(const Camera& cam) const;

    /// Training-time pseudo-label / residual map for one training view,
    /// evaluated with current weights (inspection only).
    Image pseudo_label(std::size_t view);
    Image residual_map(std::size_t view);
    ToneCurve view_curve(std::size_t view);
    ToneCurve global_curve() const;
    Mat3 view_matrix(std::size_t view) const;

    std::vector<EvalRow> evaluate(const std::vector<Camera>& cams,
                                  const std::vector<Image>& clean_gt) const;

    void save_checkpoint(const std::string& path) const;
    static std::unique_ptr<Trainer> load_checkpoint(const std::string& path,
                                                    const Scene& scene,
                                                    std::vector<Image> degraded_inputs);

    void save_loss_log(const std::string& path) const;

private:
    struct ViewState {
        Image input;
        Camera cam;
        Parameter matrix;  // 9 entries, row-major, identity init
        Vec cdf;           // cached CDF curve of the input
    };

    struct AdamState {
        Vec m, v;
    };

    struct Group {
        std::string name;
        double lr = 0;
        std::vector<Parameter*> params;
        std::vector<AdamState> states;
        bool det_guarded = false;  // 3x3 matrices: skip updates crossing the guard
    };

    void build_groups();
    void adam_update();
    LossRow step_full(std::size_t view);
    LossRow step_baseline(std::size_t view);
    Var forward_curve(Tape& t, ParamSet& ps, std::size_t view, GeneratorVars& cg,
                      Var lut_g_var);

    TrainConfig cfg_;
    GaussianCloud geometry_;  // mu/scales/quats source when geometry is frozen
    std::vector<ViewState> views_;

    Parameter colors_, gains_, offsets_, logits_;
    Parameter mu_, log_scales_, quats_;
    Parameter lut_g_;
    GeneratorWeights curve_gen_;
    GeneratorWeights scalar_gen_;
    ResidualWeights residual_;

    std::vector<Group> groups_;
    int iter_ = 0;
    int adam_t_ = 0;
    std::vector<LossRow> log_;
};

}  // namespace splatcurve
