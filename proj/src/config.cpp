// SPDX-License-Identifier: Apache-2.0
//
// nearfield-forge: low-altitude near-field XL-MIMO dataset generator
// Copyright (C) 2026 nearfield-forge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "nff/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "nff/channel.hpp"
#include "nff/errors.hpp"

namespace nff {

namespace {

using json = nlohmann::json;

std::string_view los_rule_name(LosRule r) { return r == LosRule::AnyAntenna ? "any_antenna" : "reference_antenna"; }

LosRule los_rule_from(const std::string &s)
{
    if (s == "any_antenna")
        return LosRule::AnyAntenna;
    if (s == "reference_antenna")
        return LosRule::ReferenceAntenna;
    throw ConfigError("labels.los_rule: expected \"any_antenna\" or \"reference_antenna\", got \"" + s + "\"");
}

bool same_kind(const json &def, const json &val)
{
    if (def.is_null())
        return true; // nullable field: any scalar accepted, checked on extraction
    if (def.is_number())
        return val.is_number() && (!def.is_number_integer() || val.is_number_integer());
    return def.type() == val.type();
}

// Overlays `user` on `base`, rejecting keys absent from the defaults.
void overlay(json &base, const json &user, const std::string &path)
{
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key()))
            throw ConfigError("unknown config key '" + key + "'");
        json &slot = base[it.key()];
        if (slot.is_object()) {
            if (!it.value().is_object())
                throw ConfigError("config key '" + key + "' must be an object");
            overlay(slot, it.value(), key);
            continue;
        }
        if (key == "seed" && it.value().is_null())
            continue;
        if (!same_kind(slot, it.value()))
            throw ConfigError("config key '" + key + "' has the wrong type (expected " + std::string(slot.type_name()) +
                              ", got " + std::string(it.value().type_name()) + ")");
        slot = it.value();
    }
}

template <typename T> T get(const json &j, const char *key, const std::string &section)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &) {
        throw ConfigError("config key '" + section + "." + key + "' is invalid");
    }
}

json grid_json(const PolarGrid &g) { return to_json(g); }

PolarGrid grid_from(const json &j, const std::string &section)
{
    try {
        PolarGrid g = polar_grid_from_json(j);
        g.validate();
        return g;
    } catch (const std::exception &e) {
        throw ConfigError("config section '" + section + "': " + e.what());
    }
}

} // namespace

double NoiseConfig::receive_power(double f_c) const
{
    return p_r ? *p_r : reference_receive_power(f_c, sigma2, snr_db, range_m, static_cast<std::size_t>(m_ref));
}

std::vector<TrajectoryMode> RunConfig::mode_list() const
{
    std::vector<TrajectoryMode> out;
    if (dataset.modes.empty())
        out.assign(all_modes().begin(), all_modes().end());
    for (const auto &name : dataset.modes) {
        try {
            out.push_back(mode_by_name(name));
        } catch (const std::exception &) {
            throw ConfigError("dataset.modes: unknown trajectory mode '" + name + "'");
        }
    }
    return out;
}

void RunConfig::validate() const
{
    auto need = [](bool ok, const std::string &msg) {
        if (!ok)
            throw ConfigError(msg);
    };
    need(carrier.f_c_hz >= 6e9 && carrier.f_c_hz <= 24e9, "carrier.f_c_hz must lie in [6e9, 24e9]");
    need(carrier.delta_f_hz > 0.0, "carrier.delta_f_hz must be positive");
    need(carrier.subcarriers >= 1, "carrier.subcarriers must be >= 1");
    need(array.m_y >= 1 && array.m_z >= 1, "array.m_y and array.m_z must be >= 1");
    need(array.spacing_wavelengths > 0.0, "array.spacing_wavelengths must be positive");
    need(scene.building_count_min >= 0 && scene.building_count_max >= scene.building_count_min,
         "scene.building_count_min/max out of order");
    need(trajectory.frames >= 1, "trajectory.frames must be >= 1");
    need(trajectory.dt > 0.0, "trajectory.dt must be positive");
    need(raytrace.max_depth >= 0 && raytrace.max_depth <= 3, "raytrace.max_depth must lie in [0, 3]");
    need(noise.sigma2 > 0.0, "noise.sigma2 must be positive");
    need(!noise.p_r || *noise.p_r > 0.0, "noise.p_r must be positive");
    need(noise.m_ref >= 1, "noise.m_ref must be >= 1");
    need(labels.gps_sigma2 >= 0.0, "labels.gps_sigma2 must be non-negative");
    need(sensors.image.width >= 1 && sensors.image.height >= 1, "sensors.width/height must be >= 1");
    need(sensors.image.lidar_points >= 1, "sensors.lidar_points must be >= 1");
    need(sensors.image.uav_radius > 0.0, "sensors.uav_radius must be positive");
    need(sensors.fov_deg > 0.0 && sensors.fov_deg < 180.0, "sensors.fov_deg must lie in (0, 180)");
    need(dataset.cities >= 3, "dataset.cities must be >= 3 (one per split)");
    need(dataset.trajectories_per_city >= 1, "dataset.trajectories_per_city must be >= 1");
    for (double r : dataset.split_ratios)
        need(r > 0.0, "dataset.split_ratios entries must be positive");
    need(localization.iterations >= 1, "localization.iterations must be >= 1");
    (void)mode_list();
    try {
        codebook.validate();
        localization.grid.validate();
    } catch (const std::exception &e) {
        throw ConfigError(std::string("codebook grid: ") + e.what());
    }
}

json to_json(const RunConfig &c)
{
    json j;
    j["seed"] = c.seed;
    j["carrier"] = {{"f_c_hz", c.carrier.f_c_hz}, {"delta_f_hz", c.carrier.delta_f_hz}, {"subcarriers", c.carrier.subcarriers}};
    j["array"] = {{"m_y", c.array.m_y}, {"m_z", c.array.m_z}, {"spacing_wavelengths", c.array.spacing_wavelengths}};
    const SceneParams &s = c.scene;
    j["scene"] = {{"building_count_min", s.building_count_min},
                  {"building_count_max", s.building_count_max},
                  {"footprint_min", s.footprint_min},
                  {"footprint_max", s.footprint_max},
                  {"height_min", s.height_min},
                  {"height_max", s.height_max},
                  {"road_spacing", s.road_spacing},
                  {"road_width", s.road_width},
                  {"building_gap", s.building_gap},
                  {"bs_clearance", s.bs_clearance},
                  {"bs_height", s.bs_height},
                  {"max_attempts", s.max_attempts},
                  {"bounds",
                   {{"x0", s.bounds.x0}, {"x1", s.bounds.x1}, {"y0", s.bounds.y0}, {"y1", s.bounds.y1},
                    {"z_max", s.bounds.z_max}}}};
    const TrajectoryParams &t = c.trajectory;
    j["trajectory"] = {{"frames", t.frames},         {"dt", t.dt},
                       {"clearance", t.clearance},   {"bounds_margin", t.bounds_margin},
                       {"max_redraws", t.max_redraws}, {"max_attempts", t.max_attempts}};
    j["raytrace"] = {{"max_depth", c.raytrace.max_depth}, {"scalar_tm_approx", c.raytrace.scalar_tm_approx}};
    j["codebook"] = grid_json(c.codebook);
    j["noise"] = {{"sigma2", c.noise.sigma2},
                  {"p_r", c.noise.p_r ? json(*c.noise.p_r) : json(nullptr)},
                  {"snr_db", c.noise.snr_db},
                  {"range_m", c.noise.range_m},
                  {"m_ref", c.noise.m_ref}};
    j["labels"] = {{"los_rule", std::string(los_rule_name(c.labels.los_rule))}, {"gps_sigma2", c.labels.gps_sigma2}};
    j["sensors"] = {{"width", c.sensors.image.width},
                    {"height", c.sensors.image.height},
                    {"lidar_points", c.sensors.image.lidar_points},
                    {"uav_radius", c.sensors.image.uav_radius},
                    {"fov_deg", c.sensors.fov_deg}};
    j["dataset"] = {{"cities", c.dataset.cities},
                    {"trajectories_per_city", c.dataset.trajectories_per_city},
                    {"split_ratios", c.dataset.split_ratios},
                    {"modes", c.dataset.modes}};
    j["localization"] = {{"grid", grid_json(c.localization.grid)}, {"iterations", c.localization.iterations}};
    return j;
}

json default_config_json()
{
    json j = to_json(RunConfig{});
    j["seed"] = nullptr;
    return j;
}

RunConfig config_from_json(const json &doc)
{
    if (!doc.is_object())
        throw ConfigError("config document must be a JSON object");
    json m = default_config_json();
    overlay(m, doc, "");
    if (m["seed"].is_null())
        throw ConfigError("config key 'seed' is mandatory");
    if (!m["seed"].is_number_unsigned() && !(m["seed"].is_number_integer() && m["seed"].get<std::int64_t>() >= 0))
        throw ConfigError("config key 'seed' must be a non-negative integer");

    RunConfig c;
    c.seed = m["seed"].get<std::uint64_t>();
    const json &ca = m["carrier"];
    c.carrier = {get<double>(ca, "f_c_hz", "carrier"), get<double>(ca, "delta_f_hz", "carrier"),
                 get<int>(ca, "subcarriers", "carrier")};
    const json &ar = m["array"];
    c.array = {get<int>(ar, "m_y", "array"), get<int>(ar, "m_z", "array"),
               get<double>(ar, "spacing_wavelengths", "array")};
    const json &s = m["scene"];
    c.scene.building_count_min = get<int>(s, "building_count_min", "scene");
    c.scene.building_count_max = get<int>(s, "building_count_max", "scene");
    c.scene.footprint_min = get<double>(s, "footprint_min", "scene");
    c.scene.footprint_max = get<double>(s, "footprint_max", "scene");
    c.scene.height_min = get<double>(s, "height_min", "scene");
    c.scene.height_max = get<double>(s, "height_max", "scene");
    c.scene.road_spacing = get<double>(s, "road_spacing", "scene");
    c.scene.road_width = get<double>(s, "road_width", "scene");
    c.scene.building_gap = get<double>(s, "building_gap", "scene");
    c.scene.bs_clearance = get<double>(s, "bs_clearance", "scene");
    c.scene.bs_height = get<double>(s, "bs_height", "scene");
    c.scene.max_attempts = get<int>(s, "max_attempts", "scene");
    const json &b = s["bounds"];
    c.scene.bounds = {get<double>(b, "x0", "scene.bounds"), get<double>(b, "x1", "scene.bounds"),
                      get<double>(b, "y0", "scene.bounds"), get<double>(b, "y1", "scene.bounds"),
                      get<double>(b, "z_max", "scene.bounds")};
    const json &t = m["trajectory"];
    c.trajectory.frames = get<int>(t, "frames", "trajectory");
    c.trajectory.dt = get<double>(t, "dt", "trajectory");
    c.trajectory.clearance = get<double>(t, "clearance", "trajectory");
    c.trajectory.bounds_margin = get<double>(t, "bounds_margin", "trajectory");
    c.trajectory.max_redraws = get<int>(t, "max_redraws", "trajectory");
    c.trajectory.max_attempts = get<int>(t, "max_attempts", "trajectory");
    c.raytrace.max_depth = get<int>(m["raytrace"], "max_depth", "raytrace");
    c.raytrace.scalar_tm_approx = get<bool>(m["raytrace"], "scalar_tm_approx", "raytrace");
    c.codebook = grid_from(m["codebook"], "codebook");
    const json &n = m["noise"];
    c.noise.sigma2 = get<double>(n, "sigma2", "noise");
    if (!n["p_r"].is_null()) {
        if (!n["p_r"].is_number())
            throw ConfigError("config key 'noise.p_r' must be a number or null");
        c.noise.p_r = n["p_r"].get<double>();
    }
    c.noise.snr_db = get<double>(n, "snr_db", "noise");
    c.noise.range_m = get<double>(n, "range_m", "noise");
    c.noise.m_ref = get<int>(n, "m_ref", "noise");
    c.labels.los_rule = los_rule_from(get<std::string>(m["labels"], "los_rule", "labels"));
    c.labels.gps_sigma2 = get<double>(m["labels"], "gps_sigma2", "labels");
    const json &se = m["sensors"];
    c.sensors.image.width = get<int>(se, "width", "sensors");
    c.sensors.image.height = get<int>(se, "height", "sensors");
    c.sensors.image.lidar_points = get<int>(se, "lidar_points", "sensors");
    c.sensors.image.uav_radius = get<double>(se, "uav_radius", "sensors");
    c.sensors.fov_deg = get<double>(se, "fov_deg", "sensors");
    const json &d = m["dataset"];
    c.dataset.cities = get<int>(d, "cities", "dataset");
    c.dataset.trajectories_per_city = get<int>(d, "trajectories_per_city", "dataset");
    const json &r = d["split_ratios"];
    if (!r.is_array() || r.size() != 3)
        throw ConfigError("config key 'dataset.split_ratios' must be an array of 3 numbers");
    for (std::size_t i = 0; i < 3; ++i) {
        if (!r[i].is_number())
            throw ConfigError("config key 'dataset.split_ratios' must be an array of 3 numbers");
        c.dataset.split_ratios[i] = r[i].get<double>();
    }
    c.dataset.modes = get<std::vector<std::string>>(d, "modes", "dataset");
    c.localization.grid = grid_from(m["localization"]["grid"], "localization.grid");
    c.localization.iterations = get<int>(m["localization"], "iterations", "localization");
    c.validate();
    return c;
}

json apply_overrides(json doc, const std::vector<std::string> &assignments)
{
    for (const auto &a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override '" + a + "' is not of the form key.path=value");
        const std::string path = a.substr(0, eq);
        const std::string text = a.substr(eq + 1);
        json value;
        try {
            value = json::parse(text);
        } catch (const json::exception &) {
            value = text;
        }
        json *node = &doc;
        std::stringstream ss(path);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, '.'))
            parts.push_back(part);
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            json &next = (*node)[parts[i]];
            if (next.is_null())
                next = json::object();
            if (!next.is_object())
                throw ConfigError("override '" + path + "': '" + parts[i] + "' is not a section");
            node = &next;
        }
        (*node)[parts.back()] = value;
    }
    return doc;
}

RunConfig load_config(const std::string &path, const std::vector<std::string> &overrides)
{
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot read config file '" + path + "'");
        try {
            doc = json::parse(in);
        } catch (const json::exception &e) {
            throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
        }
    }
    return config_from_json(apply_overrides(std::move(doc), overrides));
}

} // namespace nff
