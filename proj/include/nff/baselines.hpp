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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nff/codebook.hpp"
#include "nff/labels.hpp"
#include "nff/trajectory.hpp"
#include "nff/vec3.hpp"

namespace nff {

struct LocalizationResult {
    Vec3 position_est;
    PolarTuple tuple;
    std::vector<int> atoms; // global indices in selection order
    double err_3d = 0.0;
    double err_dist = 0.0;
    double err_az = 0.0;  // degrees
    double err_zen = 0.0; // degrees
};

/// OMP over the implicit dictionary of `dictionary`. The estimate is the first-selected atom's focus point.
/// Throws DegenerateChannel for a zero channel.
LocalizationResult omp_localize(const Eigen::VectorXcd &h, const NearFieldCodebook &dictionary, const Vec3 &truth,
                                int iterations = 1);

/// Largest distance between any grid focus point and the corners of its cell.
double worst_cell_diagonal(const PolarGrid &grid, const Vec3 &origin);

/// True when p lies inside the polar box spanned by the grid.
bool within_coverage(const PolarGrid &grid, const Vec3 &origin, const Vec3 &p);

enum class Strategy { Exhaustive, FarField, TwoStageNearField, ExternalPrediction };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string &name);

struct BeamTrainingResult {
    Strategy strategy = Strategy::Exhaustive;
    int chosen_index = 0; // near-field global index, or far-field angular index for FarField
    std::size_t sweeps = 0;
    double gain = 0.0; // |w^H h|^2
    double rate = 0.0;
    double norm_gain = 0.0; // referenced to the exhaustive winner
};

/// Runs each requested strategy on one channel; the exhaustive sweep is shared as the reference.
std::vector<BeamTrainingResult> beam_train(const Eigen::VectorXcd &h, const NearFieldCodebook &near,
                                           const FarFieldCodebook &far, const std::vector<Strategy> &strategies,
                                           double p_r, double sigma2);

BeamTrainingResult beam_train(const Eigen::VectorXcd &h, const NearFieldCodebook &near, const FarFieldCodebook &far,
                              Strategy strategy, double p_r, double sigma2);

struct EvalFrame {
    Eigen::VectorXcd h; // single-carrier channel
    bool los = false;
    Difficulty difficulty = Difficulty::Easy;
    int top1_global = 0; // labeled optimum, 0 if unlabeled
};

struct StrategyCell {
    std::size_t frames = 0;
    double mean_norm_gain = 0.0;
    double mean_rate = 0.0;
};

struct PairedInterval {
    std::size_t n = 0;
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Two-sided 95% interval for the mean of paired differences (Student t).
PairedInterval paired_interval(const std::vector<double> &differences);

struct EvaluationReport {
    std::vector<Strategy> strategies;
    // cell name (all, los, nlos, easy, hard) -> strategy -> metrics; absent when the cell has no frames
    std::map<std::string, std::map<Strategy, std::optional<StrategyCell>>> cells;
    std::map<Strategy, std::vector<double>> per_frame_norm_gain;
    std::map<Strategy, std::vector<double>> per_frame_rate;
    std::optional<PairedInterval> two_stage_minus_far_field;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

inline const std::vector<std::string> kEvaluationCells{"all", "los", "nlos", "easy", "hard"};

EvaluationReport evaluate_dataset(const std::vector<EvalFrame> &frames, const NearFieldCodebook &near,
                                  const FarFieldCodebook &far, const std::vector<Strategy> &strategies, double p_r,
                                  double sigma2);

struct PredictionViolation {
    std::size_t frame = 0;
    std::string reason;
};

struct ExternalScore {
    double mean_norm_gain = 0.0;
    std::vector<double> per_frame;
    std::vector<PredictionViolation> violations;
};

/// Scores predicted (k_theta, k_phi, k_r) tuples against each frame's labeled optimum.
/// Out-of-grid tuples score 0 and produce one violation record.
ExternalScore score_external_prediction(const std::vector<PolarTuple> &predictions,
                                        const std::vector<EvalFrame> &frames, const NearFieldCodebook &near);

} // namespace nff
