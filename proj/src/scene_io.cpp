/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include <fstream>

#include "splatcurve/gaussians.hpp"

#include <json.hpp>

namespace splatcurve {

using nlohmann::json;

namespace {

template <std::size_t N>
std::array<double, N> read_array(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != N) {
        throw DataError(std::string("scene: missing or malformed field '") + key + "'");
    }
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = j[key][i].get<double>();
    return out;
}

double read_number(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw DataError(std::string("scene: missing or malformed field '") + key + "'");
    }
    return j[key].get<double>();
}

}  // namespace

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("scene: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw DataError("scene: invalid JSON in " + path + ": " + e.what());
    }
    if (!j.contains("gaussians") || !j["gaussians"].is_array() || !j.contains("cameras") ||
        !j["cameras"].is_array()) {
        throw DataError("scene: expected top-level 'gaussians' and 'cameras' arrays");
    }

    Scene scene;
    for (const json& jg : j["gaussians"]) {
        Gaussian g;
        g.mu = read_array<3>(jg, "mu");
        g.log_scales = read_array<3>(jg, "log_scales");
        g.quat = read_array<4>(jg, "quat");
        g.opacity_logit = read_number(jg, "opacity_logit");
        g.color = read_array<3>(jg, "color");
        if (jg.contains("gain")) g.gain = read_array<3>(jg, "gain");
        if (jg.contains("offset")) g.offset = read_array<3>(jg, "offset");
        scene.cloud.gaussians.push_back(g);
    }
    for (const json& jc : j["cameras"]) {
        Camera c;
        c.fx = read_number(jc, "fx");
        c.fy = read_number(jc, "fy");
        c.cx = read_number(jc, "cx");
        c.cy = read_number(jc, "cy");
        c.width = static_cast<std::size_t>(read_number(jc, "width"));
        c.height = static_cast<std::size_t>(read_number(jc, "height"));
        c.world_to_camera = read_array<16>(jc, "world_to_camera");
        if (jc.contains("near")) c.near = read_number(jc, "near");
        if (jc.contains("view_id")) c.view_id = static_cast<int>(read_number(jc, "view_id"));
        validate_camera(c);
        scene.cameras.push_back(c);
    }
    return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
    json j;
    j["gaussians"] = json::array();
    for (const Gaussian& g : scene.cloud.gaussians) {
        json jg;
        jg["mu"] = g.mu;
        jg["log_scales"] = g.log_scales;
        jg["quat"] = g.quat;
        jg["opacity_logit"] = g.opacity_logit;
        jg["color"] = g.color;
        jg["gain"] = g.gain;
        jg["offset"] = g.offset;
        j["gaussians"].push_back(std::move(jg));
    }
    j["cameras"] = json::array();
    for (const Camera& c : scene.cameras) {
        json jc;
        jc["fx"] = c.fx;
        jc["fy"] = c.fy;
        jc["cx"] = c.cx;
        jc["cy"] = c.cy;
        jc["width"] = c.width;
        jc["height"] = c.height;
        jc["world_to_camera"] = c.world_to_camera;
        jc["near"] = c.near;
        jc["view_id"] = c.view_id;
        j["cameras"].push_back(std::move(jc));
    }
    std::ofstream out(path);
    if (!out) throw DataError("scene: cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace splatcurve
