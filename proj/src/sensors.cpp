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

#include "nff/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nff/constants.hpp"

namespace nff {

namespace {

std::optional<double> ray_sphere(const Vec3 &o, const Vec3 &d, const Vec3 &c, double r)
{
    const Vec3 oc = o - c;
    const double b = dot(oc, d);
    const double q = dot(oc, oc) - r * r;
    const double disc = b * b - q;
    if (disc < 0.0)
        return std::nullopt;
    const double s = std::sqrt(disc);
    const double t0 = -b - s;
    if (t0 > kRayEpsilon)
        return t0;
    const double t1 = -b + s;
    if (t1 > kRayEpsilon)
        return t1;
    return std::nullopt;
}

void check_pose(const CameraPose &pose)
{
    if (!(pose.fov_deg > 0.0 && pose.fov_deg < 180.0))
        throw std::invalid_argument("camera FoV must lie in (0, 180) degrees");
}

} // namespace

std::optional<SensorHit> cast_sensor_ray(const Scene &scene, const Vec3 &origin, const Vec3 &direction,
                                         const Vec3 &uav_pos, double uav_radius)
{
    std::optional<SensorHit> best;
    if (const auto hit = intersect(scene, origin, direction)) {
        SensorHit h;
        h.point = hit->point;
        h.range = hit->distance;
        h.semantic = hit->kind == SurfaceKind::Building ? SemanticClass::Building
                     : hit->kind == SurfaceKind::Road   ? SemanticClass::Road
                                                        : SemanticClass::Ground;
        best = h;
    }
    if (uav_radius > 0.0)
        if (const auto t = ray_sphere(origin, direction, uav_pos, uav_radius); t && (!best || *t < best->range))
            best = SensorHit{origin + direction * *t, *t, SemanticClass::Uav};
    return best;
}

Vec3 pixel_direction(const CameraPose &pose, int width, int height, int col, int row)
{
    const double tan_half = std::tan(0.5 * deg2rad(pose.fov_deg));
    const double a = (2.0 * (col + 0.5) / width - 1.0) * tan_half;  // towards camera right (-y)
    const double b = (1.0 - 2.0 * (row + 0.5) / height) * tan_half; // towards +z
    return normalized(Vec3{1.0, -a, b});
}

std::optional<std::pair<double, double>> project_to_pixel(const CameraPose &pose, int width, int height,
                                                          const Vec3 &point)
{
    const Vec3 r = point - pose.position;
    if (r.x <= 0.0)
        return std::nullopt;
    const double tan_half = std::tan(0.5 * deg2rad(pose.fov_deg));
    const double a = -r.y / r.x / tan_half;
    const double b = r.z / r.x / tan_half;
    return std::make_pair(0.5 * (a + 1.0) * width, 0.5 * (1.0 - b) * height);
}

std::vector<Vec3> lidar_directions(const CameraPose &pose, int count)
{
    check_pose(pose);
    if (count < 0)
        throw std::invalid_argument("lidar point count must be non-negative");
    std::vector<Vec3> dirs;
    if (count == 0)
        return dirs;
    // Odd row and column counts put one ray on boresight.
    auto odd_floor = [](int v) { return std::max(1, v % 2 == 1 ? v : v - 1); };
    const int rows = odd_floor(static_cast<int>(std::floor(std::sqrt(static_cast<double>(count)))));
    const int cols = odd_floor(count / rows);
    const double half = 0.5 * deg2rad(pose.fov_deg);
    dirs.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r) {
        const double el = half - (2.0 * half) * (r + 0.5) / rows;
        for (int c = 0; c < cols; ++c) {
            const double az = half - (2.0 * half) * (c + 0.5) / cols;
            dirs.push_back(normalized(Vec3{1.0, std::tan(az), std::tan(el)}));
        }
    }
    return dirs;
}

PointCloud lidar_scan(const Scene &scene, const Vec3 &uav_pos, const CameraPose &pose, int count, double uav_radius)
{
    PointCloud cloud;
    for (const Vec3 &d : lidar_directions(pose, count))
        if (const auto hit = cast_sensor_ray(scene, pose.position, d, uav_pos, uav_radius))
            cloud.points.push_back(hit->point);
    return cloud;
}

SensorImage render_view(const Scene &scene, const Vec3 &uav_pos, const CameraPose &pose, const SensorParams &params)
{
    check_pose(pose);
    if (params.width < 1 || params.height < 1)
        throw std::invalid_argument("render_view: image size must be positive");
    SensorImage img;
    img.width = params.width;
    img.height = params.height;
    img.fov_deg = pose.fov_deg;
    img.position = pose.position;
    const std::size_t n = static_cast<std::size_t>(params.width) * static_cast<std::size_t>(params.height);
    img.depth.assign(n, 0.0f);
    img.semantic.assign(n, static_cast<std::uint8_t>(SemanticClass::Ground));
    for (int row = 0; row < params.height; ++row)
        for (int col = 0; col < params.width; ++col) {
            const Vec3 d = pixel_direction(pose, params.width, params.height, col, row);
            if (const auto hit = cast_sensor_ray(scene, pose.position, d, uav_pos, params.uav_radius)) {
                const std::size_t i = static_cast<std::size_t>(row) * params.width + col;
                img.depth[i] = static_cast<float>(hit->range);
                img.semantic[i] = static_cast<std::uint8_t>(hit->semantic);
            }
        }
    return img;
}

} // namespace nff
