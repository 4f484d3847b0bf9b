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

#include <cstdint>
#include <optional>
#include <vector>

#include "nff/scene.hpp"
#include "nff/vec3.hpp"

namespace nff {

enum class SemanticClass : std::uint8_t { Ground = 0, Building = 1, Road = 2, Uav = 3 };

/// Pinhole camera at `position` looking along +x with +z up. The vertical FoV equals the horizontal one.
struct CameraPose {
    Vec3 position{0.0, 0.0, 65.0};
    double fov_deg = 90.0;
};

struct SensorParams {
    int width = 512;
    int height = 512;
    int lidar_points = 10000;
    double uav_radius = 0.5;
};

struct PointCloud {
    std::vector<Vec3> points;
};

struct SensorImage {
    int width = 0;
    int height = 0;
    double fov_deg = 90.0;
    Vec3 position;
    std::vector<float> depth;           // meters, 0 = no hit, row-major from the top-left pixel
    std::vector<std::uint8_t> semantic; // SemanticClass values

    float depth_at(int col, int row) const { return depth[static_cast<std::size_t>(row) * width + col]; }
    std::uint8_t semantic_at(int col, int row) const { return semantic[static_cast<std::size_t>(row) * width + col]; }
};

struct SensorHit {
    Vec3 point;
    double range = 0.0;
    SemanticClass semantic = SemanticClass::Ground;
};

/// Nearest hit against scene geometry or the UAV proxy sphere.
std::optional<SensorHit> cast_sensor_ray(const Scene &scene, const Vec3 &origin, const Vec3 &direction,
                                         const Vec3 &uav_pos, double uav_radius);

/// Unit ray through the center of pixel (col, row).
Vec3 pixel_direction(const CameraPose &pose, int width, int height, int col, int row);

/// Continuous pixel coordinates of a world point; nullopt when it lies behind the camera.
std::optional<std::pair<double, double>> project_to_pixel(const CameraPose &pose, int width, int height,
                                                          const Vec3 &point);

/// At most N rays on a cell-centered grid of projected azimuth/elevation angles covering the camera FoV.
/// Rows and columns are the largest odd counts with rows <= sqrt(N) and rows * cols <= N, so the
/// grid holds a boresight ray (10000 gives 99 x 101).
std::vector<Vec3> lidar_directions(const CameraPose &pose, int count);

PointCloud lidar_scan(const Scene &scene, const Vec3 &uav_pos, const CameraPose &pose, int count,
                      double uav_radius = 0.5);

SensorImage render_view(const Scene &scene, const Vec3 &uav_pos, const CameraPose &pose,
                        const SensorParams &params = {});

} // namespace nff
