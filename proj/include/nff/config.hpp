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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nff/codebook.hpp"
#include "nff/labels.hpp"
#include "nff/raytrace.hpp"
#include "nff/scene.hpp"
#include "nff/sensors.hpp"
#include "nff/trajectory.hpp"

namespace nff {

struct CarrierConfig {
    double f_c_hz = 7e9;
    double delta_f_hz = 30e3;
    int subcarriers = 16;
};

struct ArrayConfig {
    int m_y = 8;
    int m_z = 8;
    double spacing_wavelengths = 0.5;
};

struct NoiseConfig {
    double sigma2 = 1.0;
    std::optional<double> p_r; // derived from the reference link budget when unset
    double snr_db = 20.0;
    double range_m = 100.0;
    int m_ref = 4096;

    double receive_power(double f_c) const;
};

struct LabelConfig {
    LosRule los_rule = LosRule::AnyAntenna;
    double gps_sigma2 = kDefaultGpsVariance;
};

struct SensorConfig {
    SensorParams image;
    double fov_deg = 90.0;
};

struct DatasetConfig {
    int cities = 5;
    int trajectories_per_city = 20;
    std::array<double, 3> split_ratios{22.0, 4.0, 4.0};
    std::vector<std::string> modes; // empty: all ten, assigned round-robin by trajectory index
};

struct LocalizationConfig {
    PolarGrid grid = localization_grid();
    int iterations = 1;
};

/// Every tunable of a generation run. Round-trips through JSON without loss.
struct RunConfig {
    std::uint64_t seed = 0;
    CarrierConfig carrier;
    ArrayConfig array;
    SceneParams scene;
    TrajectoryParams trajectory;
    TraceOptions raytrace;
    PolarGrid codebook;
    NoiseConfig noise;
    LabelConfig labels;
    SensorConfig sensors;
    DatasetConfig dataset;
    LocalizationConfig localization;

    std::vector<TrajectoryMode> mode_list() const;
    void validate() const; // throws ConfigError
};

/// Complete document with every key present; the seed is null.
nlohmann::json default_config_json();

nlohmann::json to_json(const RunConfig &cfg);

/// Overlays `doc` on the defaults. Unknown keys, type mismatches and a missing seed throw ConfigError naming the key.
RunConfig config_from_json(const nlohmann::json &doc);

/// Applies `a.b.c=value` overrides. The value is parsed as JSON, falling back to a plain string.
nlohmann::json apply_overrides(nlohmann::json doc, const std::vector<std::string> &assignments);

RunConfig load_config(const std::string &path, const std::vector<std::string> &overrides = {});

} // namespace nff
