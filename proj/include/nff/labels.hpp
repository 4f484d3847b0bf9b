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
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nff/codebook.hpp"
#include "nff/raytrace.hpp"
#include "nff/vec3.hpp"

namespace nff {

/// log2(1 + P_r |w^H h|^2 / sigma2). Requires ||w|| = 1 within 1e-9.
double achievable_rate(const Eigen::VectorXcd &w, const Eigen::VectorXcd &h, double p_r, double sigma2);
/// Same rate from a precomputed |w^H h|^2.
double rate_from_gain(double gain, double p_r, double sigma2);

/// |w^H h|^2 / |w_opt^H h|^2. Throws UndefinedReference when w_opt^H h = 0.
double normalized_gain(const Eigen::VectorXcd &w, const Eigen::VectorXcd &h, const Eigen::VectorXcd &w_opt);

/// Indices of the n largest values in descending order; ties go to the smaller index.
/// rel_tol > 0 widens the tie band to values within that relative distance of the running maximum.
std::vector<std::size_t> top_n_indices(const std::vector<double> &values, std::size_t n, double rel_tol = 0.0);

inline constexpr std::size_t kTopBeams = 5;

struct BeamLabel {
    std::array<int, kTopBeams> top_global{};
    std::array<PolarTuple, kTopBeams> top_tuples{};
    std::array<double, kTopBeams> top_gains{};
    double top1_rate = 0.0;
    bool los = false;
};

/// Resolution of the ranking grid: gains are compared as round(g / g_max * kGainGrid).
inline constexpr double kGainGrid = 1099511627776.0; // 2^40

/// Exhaustive sweep of the codebook. Gains within one grid step of each other tie and go to the
/// smaller global index; top_gains holds the grid values. Throws DegenerateChannel for an all-zero channel.
BeamLabel label_beams(const Eigen::VectorXcd &h, const NearFieldCodebook &codebook, double p_r, double sigma2);

enum class LosRule { AnyAntenna, ReferenceAntenna };

bool los_indicator(const PathSet &paths, LosRule rule = LosRule::AnyAntenna, std::size_t reference_antenna = 0);

struct GpsObservation {
    Vec3 u_tilde;
    double sigma2_gps = 0.0;
};

inline constexpr double kDefaultGpsVariance = 0.5;

GpsObservation gps_observe(const Vec3 &u, double sigma2_gps, std::uint64_t seed);

} // namespace nff
