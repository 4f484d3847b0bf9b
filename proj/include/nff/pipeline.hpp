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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nff/baselines.hpp"
#include "nff/config.hpp"
#include "nff/dataio.hpp"
#include "nff/raytrace.hpp"
#include "nff/scene.hpp"

namespace nff {

std::uint64_t scene_seed(const RunConfig &cfg, int city);
std::uint64_t trajectory_seed(const RunConfig &cfg, int city, int index);

Scene city_scene(const RunConfig &cfg, int city);
ArrayGeometry run_array(const RunConfig &cfg, const Scene &scene);
CameraPose run_camera(const RunConfig &cfg, const Scene &scene);

/// Physical parameters a reader needs, as stored under "parameters" in the manifest.
nlohmann::json dataset_parameters(const RunConfig &cfg);

/// scene -> trajectory -> ray tracing -> channel -> labels -> sensors for one trajectory, in memory.
/// `codebook` must be built for run_array(cfg, scene).
TrajectoryRecord generate_trajectory(const RunConfig &cfg, const Scene &scene, const NearFieldCodebook &codebook,
                                     int city, int index);

struct GenerateOptions {
    int workers = 1;
    bool resume = true;
    std::function<void(const std::string &)> progress; // one line per finished trajectory
};

struct GenerateFailure {
    std::string id;
    std::string reason;
};

struct GenerateSummary {
    std::size_t trajectories = 0;
    std::size_t resumed = 0;
    std::vector<GenerateFailure> failures;
    DatasetStatistics statistics;

    bool ok() const { return failures.empty(); }
};

/// Writes the dataset under `out`. Work happens in `<out>.partial`, which is renamed on success.
/// Failed trajectories move to `<out>.partial/quarantine` and are listed in `<out>.partial/failures.log`.
GenerateSummary generate_dataset(const RunConfig &cfg, const std::filesystem::path &out,
                                 const GenerateOptions &options = {});

/// Worker count from FORGE_WORKERS when set and valid, else `fallback`.
int workers_from_env(int fallback);

struct LocalizationSummary {
    std::size_t frames = 0;          // LoS frames with a non-zero channel
    std::size_t within_coverage = 0;
    std::size_t within_bound = 0;    // covered frames with err_3d <= cell diagonal
    double mean_err_3d = 0.0;
    double cell_diagonal = 0.0;
    std::vector<double> errors;
};

struct SplitEvaluation {
    EvaluationReport report;
    std::optional<LocalizationSummary> localization;
    std::vector<std::vector<int>> chosen_beams; // per trajectory, labeled top-1 index of each valid frame
};

/// Beam-training strategies (and optionally OMP localization) over one split of a dataset on disk.
/// Throws DatasetError when the split holds no trajectories.
SplitEvaluation evaluate_split(const DatasetReader &reader, const std::string &split,
                               const std::vector<Strategy> &strategies, const RunConfig &cfg, bool localize);

} // namespace nff
