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

#include "nff/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nff/errors.hpp"
#include "nff/rng.hpp"

namespace nff {

bool Building::contains(const Vec3 &p, double inflate) const
{
    return p.x >= footprint.x0 - inflate && p.x <= footprint.x1 + inflate && p.y >= footprint.y0 - inflate &&
           p.y <= footprint.y1 + inflate && p.z >= -inflate && p.z <= height + inflate;
}

std::pair<Material, SurfaceKind> Scene::ground_material_at(double x, double y) const
{
    for (const auto &road : roads)
        if (road.area.contains(x, y))
            return {road.material, SurfaceKind::Road};
    return {ground, SurfaceKind::Ground};
}

int Scene::building_containing(const Vec3 &p, double inflate) const
{
    for (std::size_t i = 0; i < buildings.size(); ++i)
        if (buildings[i].contains(p, inflate))
            return static_cast<int>(i);
    return -1;
}

Scene make_empty_scene(bool with_ground)
{
    Scene s;
    s.has_ground = with_ground;
    s.ground = MaterialTable::builtin().get(MaterialKind::MediumDryGround);
    s.bs_position = {s.bounds.x0, 0.5 * (s.bounds.y0 + s.bounds.y1), 65.0};
    return s;
}

namespace {

void check_params(const SceneParams &p)
{
    if (p.building_count_min < 0 || p.building_count_max < p.building_count_min)
        throw std::invalid_argument("scene: building count range is empty");
    if (p.footprint_min <= 0.0 || p.footprint_max < p.footprint_min)
        throw std::invalid_argument("scene: footprint size range is empty");
    if (p.height_min < 20.0 || p.height_max > 60.0 || p.height_max < p.height_min)
        throw std::invalid_argument("scene: building heights must lie within [20, 60] m");
    if (p.road_spacing <= p.road_width || p.road_width < 0.0)
        throw std::invalid_argument("scene: road spacing must exceed road width");
    if (p.max_attempts <= 0)
        throw std::invalid_argument("scene: max_attempts must be positive");
}

} // namespace

Scene generate_scene(std::uint64_t seed, const SceneParams &params)
{
    check_params(params);
    const auto &table = MaterialTable::builtin();
    Scene scene;
    scene.bounds = params.bounds;
    scene.seed = seed;
    scene.has_ground = true;
    scene.ground = table.get(MaterialKind::MediumDryGround);
    scene.bs_position = {scene.bounds.x0, 0.5 * (scene.bounds.y0 + scene.bounds.y1), params.bs_height};

    const Bounds &b = scene.bounds;
    const Material concrete = table.get(MaterialKind::Concrete);
    const double half_w = 0.5 * params.road_width;
    if (params.road_width > 0.0) {
        for (double x = b.x0 + 0.5 * params.road_spacing; x < b.x1; x += params.road_spacing)
            scene.roads.push_back({{std::max(b.x0, x - half_w), std::min(b.x1, x + half_w), b.y0, b.y1}, concrete});
        const double yc = 0.5 * (b.y0 + b.y1);
        // Horizontal streets are aligned so that one runs along boresight (y = yc).
        const double first = yc - std::floor((yc - b.y0) / params.road_spacing) * params.road_spacing;
        for (double y = first; y <= b.y1; y += params.road_spacing)
            scene.roads.push_back({{b.x0, b.x1, std::max(b.y0, y - half_w), std::min(b.y1, y + half_w)}, concrete});
    }

    Rng rng(derive_seed(seed, {0x5CE7E}));
    const int target = rng.uniform_int(params.building_count_min, params.building_count_max);
    const MaterialKind facade_kinds[] = {MaterialKind::Marble, MaterialKind::Wood, MaterialKind::Metal};

    int attempts = 0;
    while (static_cast<int>(scene.buildings.size()) < target && attempts < params.max_attempts) {
        ++attempts;
        const double w = rng.uniform(params.footprint_min, params.footprint_max);
        const double d = rng.uniform(params.footprint_min, params.footprint_max);
        if (w > b.x1 - b.x0 || d > b.y1 - b.y0)
            continue;
        const double x0 = rng.uniform(b.x0, b.x1 - w);
        const double y0 = rng.uniform(b.y0, b.y1 - d);
        const Rect fp{x0, x0 + w, y0, y0 + d};
        const double height = rng.uniform(params.height_min, params.height_max);
        const MaterialKind kind = facade_kinds[rng.uniform_index(3)];

        bool ok = true;
        for (const auto &road : scene.roads)
            if (fp.overlaps(road.area, params.building_gap)) {
                ok = false;
                break;
            }
        for (const auto &other : scene.buildings)
            if (ok && fp.overlaps(other.footprint, params.building_gap)) {
                ok = false;
                break;
            }
        // Keep-out disc around the BS mast.
        const double cx = std::clamp(scene.bs_position.x, fp.x0, fp.x1);
        const double cy = std::clamp(scene.bs_position.y, fp.y0, fp.y1);
        if (std::hypot(cx - scene.bs_position.x, cy - scene.bs_position.y) < params.bs_clearance)
            ok = false;
        if (!ok)
            continue;
        scene.buildings.push_back({fp, height, table.get(kind)});
    }
    if (static_cast<int>(scene.buildings.size()) < params.building_count_min)
        throw InfeasibleLayout("scene: placed " + std::to_string(scene.buildings.size()) + " of at least " +
                               std::to_string(params.building_count_min) + " buildings after " +
                               std::to_string(attempts) + " attempts");
    return scene;
}

bool ray_box(const Vec3 &origin, const Vec3 &direction, const Vec3 &lo, const Vec3 &hi, double &t_near,
             double &t_far, int &entry_axis)
{
    t_near = -std::numeric_limits<double>::infinity();
    t_far = std::numeric_limits<double>::infinity();
    entry_axis = -1;
    for (int a = 0; a < 3; ++a) {
        const double o = origin[a];
        const double d = direction[a];
        if (d == 0.0) {
            if (o < lo[a] || o > hi[a])
                return false;
            continue;
        }
        double t0 = (lo[a] - o) / d;
        double t1 = (hi[a] - o) / d;
        if (t0 > t1)
            std::swap(t0, t1);
        if (t0 > t_near) {
            t_near = t0;
            entry_axis = a;
        }
        t_far = std::min(t_far, t1);
        if (t_near > t_far)
            return false;
    }
    return true;
}

std::optional<Hit> intersect(const Scene &scene, const Vec3 &origin, const Vec3 &direction)
{
    if (std::abs(norm(direction) - 1.0) > 1e-9)
        throw std::invalid_argument("intersect: direction must be unit length");

    std::optional<Hit> best;
    double best_t = std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
        const auto &bld = scene.buildings[i];
        const Vec3 lo{bld.footprint.x0, bld.footprint.y0, 0.0};
        const Vec3 hi{bld.footprint.x1, bld.footprint.y1, bld.height};
        double t0, t1;
        int axis;
        if (!ray_box(origin, direction, lo, hi, t0, t1, axis))
            continue;
        // Rays starting on or inside a box's surface are not reported against that box.
        if (t0 <= kRayEpsilon || axis < 0 || t0 >= best_t)
            continue;
        Hit h;
        h.distance = t0;
        h.point = origin + direction * t0;
        Vec3 n;
        n[axis] = direction[axis] > 0.0 ? -1.0 : 1.0;
        h.normal = n;
        h.material = bld.material;
        h.kind = SurfaceKind::Building;
        h.building = static_cast<int>(i);
        best = h;
        best_t = t0;
    }

    if (scene.has_ground && direction.z < 0.0) {
        const double t = -origin.z / direction.z;
        if (t > kRayEpsilon && t < best_t) {
            const Vec3 p = origin + direction * t;
            if (scene.bounds.contains_xy(p.x, p.y)) {
                Hit h;
                h.distance = t;
                h.point = {p.x, p.y, 0.0};
                h.normal = {0.0, 0.0, 1.0};
                auto [mat, kind] = scene.ground_material_at(p.x, p.y);
                h.material = mat;
                h.kind = kind;
                best = h;
            }
        }
    }
    return best;
}

bool los_blocked(const Scene &scene, const Vec3 &a, const Vec3 &b)
{
    const Vec3 delta = b - a;
    const double len = norm(delta);
    if (len == 0.0)
        throw std::invalid_argument("los_blocked: endpoints coincide");
    if (scene.has_ground && std::min(a.z, b.z) < -kRayEpsilon)
        return true;
    const Vec3 dir = delta / len;
    const double t_lo = kRayEpsilon;
    const double t_hi = len - kRayEpsilon;
    for (const auto &bld : scene.buildings) {
        const Vec3 lo{bld.footprint.x0, bld.footprint.y0, 0.0};
        const Vec3 hi{bld.footprint.x1, bld.footprint.y1, bld.height};
        double t0, t1;
        int axis;
        if (!ray_box(a, dir, lo, hi, t0, t1, axis))
            continue;
        if (std::max(t0, t_lo) < std::min(t1, t_hi))
            return true;
    }
    return false;
}

double Face::outside_distance(const Vec3 &p) const
{
    const double u = p[(axis + 1) % 3];
    const double v = p[(axis + 2) % 3];
    const double du = std::max({u0 - u, u - u1, 0.0});
    const double dv = std::max({v0 - v, v - v1, 0.0});
    return std::max(du, dv);
}

std::vector<Face> reflective_faces(const Scene &scene)
{
    std::vector<Face> faces;
    faces.reserve(scene.buildings.size() * 5 + 1);
    for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
        const auto &bld = scene.buildings[i];
        const Rect &fp = bld.footprint;
        const int idx = static_cast<int>(i);
        // x-walls: in-plane axes are y (u) and z (v).
        faces.push_back({0, fp.x0, -1.0, fp.y0, fp.y1, 0.0, bld.height, idx, bld.material});
        faces.push_back({0, fp.x1, +1.0, fp.y0, fp.y1, 0.0, bld.height, idx, bld.material});
        // y-walls: in-plane axes are z (u) and x (v).
        faces.push_back({1, fp.y0, -1.0, 0.0, bld.height, fp.x0, fp.x1, idx, bld.material});
        faces.push_back({1, fp.y1, +1.0, 0.0, bld.height, fp.x0, fp.x1, idx, bld.material});
        // roof: in-plane axes are x (u) and y (v).
        faces.push_back({2, bld.height, +1.0, fp.x0, fp.x1, fp.y0, fp.y1, idx, bld.material});
    }
    if (scene.has_ground) {
        const Bounds &b = scene.bounds;
        faces.push_back({2, 0.0, +1.0, b.x0, b.x1, b.y0, b.y1, -1, scene.ground});
    }
    return faces;
}

Scene mirror_y(const Scene &scene)
{
    Scene m = scene;
    m.bounds.y0 = -scene.bounds.y1;
    m.bounds.y1 = -scene.bounds.y0;
    for (auto &bld : m.buildings)
        bld.footprint = {bld.footprint.x0, bld.footprint.x1, -bld.footprint.y1, -bld.footprint.y0};
    for (auto &road : m.roads)
        road.area = {road.area.x0, road.area.x1, -road.area.y1, -road.area.y0};
    m.bs_position.y = -scene.bs_position.y;
    return m;
}

namespace {

nlohmann::json material_json(const Material &m)
{
    return {{"kind", std::string(to_string(m.kind))},
            {"a", m.permittivity_a},
            {"b", m.permittivity_b},
            {"c", m.conductivity_c},
            {"d", m.conductivity_d}};
}

Material material_from_json(const nlohmann::json &j)
{
    Material m;
    m.kind = material_kind_from_string(j.at("kind").get<std::string>());
    m.permittivity_a = j.at("a").get<double>();
    m.permittivity_b = j.at("b").get<double>();
    m.conductivity_c = j.at("c").get<double>();
    m.conductivity_d = j.at("d").get<double>();
    return m;
}

nlohmann::json rect_json(const Rect &r) { return nlohmann::json::array({r.x0, r.x1, r.y0, r.y1}); }

Rect rect_from_json(const nlohmann::json &j)
{
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

} // namespace

nlohmann::json to_json(const Scene &scene)
{
    nlohmann::json doc;
    doc["schema"] = "nff.scene/1";
    doc["seed"] = scene.seed;
    doc["bounds"] = {{"x", {scene.bounds.x0, scene.bounds.x1}},
                     {"y", {scene.bounds.y0, scene.bounds.y1}},
                     {"z_max", scene.bounds.z_max}};
    doc["bs"] = {scene.bs_position.x, scene.bs_position.y, scene.bs_position.z};
    doc["has_ground"] = scene.has_ground;
    doc["ground_material"] = std::string(to_string(scene.ground.kind));

    // Materials table: every material referenced by the scene, keyed by kind.
    nlohmann::json materials = nlohmann::json::object();
    materials[std::string(to_string(scene.ground.kind))] = material_json(scene.ground);
    nlohmann::json buildings = nlohmann::json::array();
    for (const auto &bld : scene.buildings) {
        materials[std::string(to_string(bld.material.kind))] = material_json(bld.material);
        buildings.push_back({{"footprint", rect_json(bld.footprint)},
                             {"height", bld.height},
                             {"material", std::string(to_string(bld.material.kind))}});
    }
    nlohmann::json roads = nlohmann::json::array();
    for (const auto &road : scene.roads) {
        materials[std::string(to_string(road.material.kind))] = material_json(road.material);
        roads.push_back({{"area", rect_json(road.area)}, {"material", std::string(to_string(road.material.kind))}});
    }
    doc["buildings"] = std::move(buildings);
    doc["roads"] = std::move(roads);
    doc["materials"] = std::move(materials);
    return doc;
}

Scene scene_from_json(const nlohmann::json &doc)
{
    try {
        Scene s;
        s.seed = doc.at("seed").get<std::uint64_t>();
        s.bounds.x0 = doc.at("bounds").at("x").at(0).get<double>();
        s.bounds.x1 = doc.at("bounds").at("x").at(1).get<double>();
        s.bounds.y0 = doc.at("bounds").at("y").at(0).get<double>();
        s.bounds.y1 = doc.at("bounds").at("y").at(1).get<double>();
        s.bounds.z_max = doc.at("bounds").at("z_max").get<double>();
        const auto &bs = doc.at("bs");
        s.bs_position = {bs.at(0).get<double>(), bs.at(1).get<double>(), bs.at(2).get<double>()};
        s.has_ground = doc.at("has_ground").get<bool>();
        const auto &materials = doc.at("materials");
        auto lookup = [&](const std::string &name) { return material_from_json(materials.at(name)); };
        s.ground = lookup(doc.at("ground_material").get<std::string>());
        for (const auto &b : doc.at("buildings"))
            s.buildings.push_back(
                {rect_from_json(b.at("footprint")), b.at("height").get<double>(), lookup(b.at("material"))});
        for (const auto &r : doc.at("roads"))
            s.roads.push_back({rect_from_json(r.at("area")), lookup(r.at("material"))});
        return s;
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument(std::string("scene json: ") + e.what());
    }
}

} // namespace nff
