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
#include <string>
#include <vector>

#include <json.hpp>

#include "nff/materials.hpp"
#include "nff/vec3.hpp"

namespace nff {

/// Axis-aligned rectangle in the xy-plane [x0, x1] x [y0, y1].
struct Rect {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

    double width() const { return x1 - x0; }
    double depth() const { return y1 - y0; }
    bool contains(double x, double y, double tol = 0.0) const
    {
        return x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol;
    }
    /// True when the rectangles grown by gap/2 on each side overlap with non-zero area.
    bool overlaps(const Rect &o, double gap = 0.0) const
    {
        return x0 - gap < o.x1 && o.x0 - gap < x1 && y0 - gap < o.y1 && o.y0 - gap < y1;
    }
    friend bool operator==(const Rect &, const Rect &) = default;
};

struct Building {
    Rect footprint;
    double height = 0.0;
    Material material;

    bool contains(const Vec3 &p, double inflate = 0.0) const;
    friend bool operator==(const Building &, const Building &) = default;
};

struct Road {
    Rect area;
    Material material;
    friend bool operator==(const Road &, const Road &) = default;
};

/// Observed region. Rays leaving it (or climbing above the ceiling) terminate.
struct Bounds {
    double x0 = 0.0, x1 = 120.0;
    double y0 = -60.0, y1 = 60.0;
    double z_max = 120.0;

    bool contains_xy(double x, double y, double tol = 1e-9) const
    {
        return x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol;
    }
    friend bool operator==(const Bounds &, const Bounds &) = default;
};

enum class SurfaceKind { Ground, Building, Road };

struct Scene {
    Bounds bounds;
    std::vector<Building> buildings;
    std::vector<Road> roads;
    bool has_ground = true;
    Material ground;
    Vec3 bs_position{0.0, 0.0, 65.0};
    std::uint64_t seed = 0;

    /// Material and kind of the ground at (x, y): road patches override the terrain.
    std::pair<Material, SurfaceKind> ground_material_at(double x, double y) const;

    /// Index of the building containing p (closed box), or -1.
    int building_containing(const Vec3 &p, double inflate = 0.0) const;

    friend bool operator==(const Scene &, const Scene &) = default;
};

/// An empty scene (ground only) over the default bounds with the built-in ground material.
Scene make_empty_scene(bool with_ground = true);

struct SceneParams {
    int building_count_min = 6;
    int building_count_max = 10;
    double footprint_min = 8.0;  // m, per side
    double footprint_max = 18.0; // m, per side
    double height_min = 20.0;
    double height_max = 60.0;
    double road_spacing = 40.0; // grid pitch of the road network
    double road_width = 8.0;
    double building_gap = 4.0;  // minimum clearance between buildings and to roads
    double bs_clearance = 10.0; // keep-out radius around the BS mast footprint
    double bs_height = 65.0;
    int max_attempts = 4000;
    Bounds bounds;
};

/// Procedural city: road grid, then rejection-sampled non-overlapping buildings.
/// Throws InfeasibleLayout when fewer than building_count_min buildings can be placed.
Scene generate_scene(std::uint64_t seed, const SceneParams &params = {});

struct Hit {
    Vec3 point;
    Vec3 normal;
    Material material;
    double distance = 0.0;
    SurfaceKind kind = SurfaceKind::Ground;
    int building = -1;
};

inline constexpr double kRayEpsilon = 1e-6;

/// Nearest intersection at distance > kRayEpsilon. Direction must be unit length (1e-9).
std::optional<Hit> intersect(const Scene &scene, const Vec3 &origin, const Vec3 &direction);

/// True iff the open segment (a, b) intersects a building or the ground.
bool los_blocked(const Scene &scene, const Vec3 &a, const Vec3 &b);

/// Ray/box slab test; returns the entry/exit parameters when the line meets the box.
bool ray_box(const Vec3 &origin, const Vec3 &direction, const Vec3 &lo, const Vec3 &hi, double &t_near,
             double &t_far, int &entry_axis);

/// Planar axis-aligned reflector: a building wall, a roof, or the ground.
struct Face {
    int axis = 2;          // plane is {p : p[axis] == coord}
    double coord = 0.0;
    double normal_sign = 1.0;
    double u0 = 0.0, u1 = 0.0; // extent along (axis + 1) % 3
    double v0 = 0.0, v1 = 0.0; // extent along (axis + 2) % 3
    int building = -1;          // -1 for the ground
    Material material;

    Vec3 normal() const
    {
        Vec3 n;
        n[axis] = normal_sign;
        return n;
    }
    double signed_distance(const Vec3 &p) const { return normal_sign * (p[axis] - coord); }
    Vec3 mirror(const Vec3 &p) const
    {
        Vec3 q = p;
        q[axis] = 2.0 * coord - p[axis];
        return q;
    }
    bool contains(const Vec3 &p, double tol = 0.0) const
    {
        const double u = p[(axis + 1) % 3];
        const double v = p[(axis + 2) % 3];
        return u >= u0 - tol && u <= u1 + tol && v >= v0 - tol && v <= v1 + tol;
    }
    /// Largest distance by which p's in-plane projection lies outside the rectangle (0 if inside).
    double outside_distance(const Vec3 &p) const;
};

/// Every reflecting face in the scene: 4 walls + roof per building, then the ground (if any).
std::vector<Face> reflective_faces(const Scene &scene);

/// Mirror image of the scene across the xz-plane (y -> -y).
Scene mirror_y(const Scene &scene);

nlohmann::json to_json(const Scene &scene);
Scene scene_from_json(const nlohmann::json &doc);

} // namespace nff
