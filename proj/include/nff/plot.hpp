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

#include <string>
#include <vector>

#include "nff/baselines.hpp"
#include "nff/scene.hpp"
#include "nff/vec3.hpp"

namespace nff {

// Static SVG charts. Output depends only on the inputs (fixed-precision number formatting).

/// Mean achievable rate per strategy, one bar group per evaluation cell.
std::string svg_rate_bars(const EvaluationReport &report);

/// Empirical CDF of per-frame normalized gain, one curve per strategy.
std::string svg_gain_cdf(const EvaluationReport &report);

/// Labeled top-1 global beam index against frame number, one line per trajectory.
std::string svg_beam_index(const std::vector<std::vector<int>> &series, int codebook_size);

/// Top view of buildings, roads, the BS and optional UAV tracks.
std::string svg_scene_top_view(const Scene &scene, const std::vector<std::vector<Vec3>> &tracks = {});

} // namespace nff
