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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nff/scene.hpp"
#include "nff/vec3.hpp"

namespace nff {

enum class ModeName { Zigzag = 1, WallHug, Inspect, SuddenTurn, StreetPatrol, Hover, CityCruise, Orbit, FastTransit, Scan };

enum class Difficulty { Hard, Easy };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
    double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
    bool operator==(const Interval &) const = default;
};

struct TrajectoryMode {
    int id = 0;
    ModeName name = ModeName::Zigzag;
    Interval v_horiz; // m/s, horizontal speed magnitude
    Interval v_vert;  // m/s, vertical speed magnitude
    Interval altitude;
    Difficulty difficulty = Difficulty::Easy;

    std::string_view label() const;
    bool operator==(const TrajectoryMode &) const = default;
};

const std::array<TrajectoryMode, 10> &all_modes();
const TrajectoryMode &mode_by_id(int id); // throws std::out_of_range
const TrajectoryMode &mode_by_name(std::string_view name);
std::string_view to_string(Difficulty d);

struct Pose {
    double t = 0.0;
    Vec3 u;
    Vec3 v;
    bool operator==(const Pose &) const = default;
};

struct Trajectory {
    TrajectoryMode mode;
    std::vector<Pose> frames;
    std::uint64_t seed = 0;
    double dt = 0.1;

    bool operator==(const Trajectory &) const = default;
};

struct TrajectoryParams {
    int frames = 20;
    double dt = 0.1;
    double clearance = 1.0;     // minimum distance kept from building boxes while planning
    double bounds_margin = 1.0; // horizontal margin kept from the scene boundary
    int max_redraws = 16;       // per frame
    int max_attempts = 64;      // full restarts before giving up
};

/// Throws ModeInfeasible when no valid trajectory is found or the scene lacks what the mode needs.
Trajectory simulate_trajectory(const Scene &scene, const TrajectoryMode &mode, std::uint64_t seed,
                               const TrajectoryParams &params = {});
Trajectory simulate_trajectory(const Scene &scene, const TrajectoryMode &mode, std::uint64_t seed, int frames,
                               double dt);

struct Violation {
    int frame = -1;
    std::string rule; // time, altitude, v_horiz, v_vert, collision, below_ground, out_of_bounds
    std::string detail;
};

/// Empty iff every frame respects its mode envelope, lies outside buildings, above ground and inside the bounds.
std::vector<Violation> validate_trajectory(const Scene &scene, const Trajectory &traj);

/// max_t |u_{t+1} - u_t - v_t dt|
double kinematic_residual(const Trajectory &traj);

/// Largest heading change between consecutive horizontal velocities, in degrees.
double max_heading_change_deg(const Trajectory &traj);

nlohmann::json to_json(const Trajectory &traj);
Trajectory trajectory_from_json(const nlohmann::json &doc);

} // namespace nff
