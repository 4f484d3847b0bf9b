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

#include "nff/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nff/constants.hpp"
#include "nff/errors.hpp"

namespace nff {

namespace {

double wrapped_angle_deg(double a, double b)
{
    double d = std::fmod(std::abs(rad2deg(a - b)), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

std::size_t argmax_first(const std::vector<double> &v) { return top_n_indices(v, 1).front(); }

// Two-sided 95% Student t quantiles for 1..30 degrees of freedom.
constexpr std::array<double, 30> kT975{
    12.706204736175, 4.302652729750, 3.182446305284, 2.776445105198, 2.570581835636,
    2.446911851145, 2.364624251593, 2.306004135204, 2.262157162798, 2.228138851986,
    2.200985160092, 2.178812829667, 2.160368656463, 2.144786687918, 2.131449545560,
    2.119905299221, 2.109815577833, 2.100922040241, 2.093024054408, 2.085963447266,
    2.079613844728, 2.073873067904, 2.068657610419, 2.063898561628, 2.059538552753,
    2.055529438643, 2.051830516480, 2.048407141795, 2.045229642133, 2.042272456301,
};

double student_t975(std::size_t dof)
{
    if (dof == 0)
        return std::numeric_limits<double>::infinity();
    if (dof <= kT975.size())
        return kT975[dof - 1];
    // Cornish-Fisher expansion around the normal quantile; error below 2e-6 past 30 degrees of freedom.
    const double z = 1.959963984540054;
    const double v = static_cast<double>(dof);
    const double z3 = z * z * z, z5 = z3 * z * z, z7 = z5 * z * z;
    return z + (z3 + z) / (4.0 * v) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * v * v) +
           (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * v * v * v);
}

} // namespace

LocalizationResult omp_localize(const Eigen::VectorXcd &h, const NearFieldCodebook &dict, const Vec3 &truth,
                                int iterations)
{
    if (iterations < 1)
        throw std::invalid_argument("omp_localize: iterations must be >= 1");
    if (h.size() == 0 || h.norm() == 0.0)
        throw DegenerateChannel("omp_localize: zero channel");

    LocalizationResult res;
    Eigen::VectorXcd residual = h;
    Eigen::MatrixXcd atoms(h.size(), 0);
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> g = dict.gains(residual);
        for (int k : res.atoms)
            g[static_cast<std::size_t>(k - 1)] = -1.0;
        const int k = static_cast<int>(argmax_first(g)) + 1;
        res.atoms.push_back(k);
        if (it + 1 == iterations)
            break;
        atoms.conservativeResize(Eigen::NoChange, atoms.cols() + 1);
        atoms.col(atoms.cols() - 1) = dict.codeword(k);
        const Eigen::VectorXcd coef = atoms.colPivHouseholderQr().solve(h);
        residual = h - atoms * coef;
        if (residual.norm() <= 1e-14 * h.norm())
            break;
    }

    res.tuple = decompose_index(res.atoms.front(), dict.grid());
    res.position_est = focus_point(res.tuple, dict.grid(), dict.origin());
    const PolarCoords est = cartesian_to_polar(res.position_est, dict.origin());
    const PolarCoords tru = cartesian_to_polar(truth, dict.origin());
    res.err_3d = distance(res.position_est, truth);
    res.err_dist = std::abs(est.d - tru.d);
    res.err_az = wrapped_angle_deg(est.theta, tru.theta);
    res.err_zen = wrapped_angle_deg(est.phi, tru.phi);
    return res;
}

double worst_cell_diagonal(const PolarGrid &grid, const Vec3 &origin)
{
    double worst = 0.0;
    const int nt = std::max(1, grid.n_theta - 1), np = std::max(1, grid.n_phi - 1), nr = std::max(1, grid.n_r - 1);
    std::array<Vec3, 8> c;
    for (int i = 1; i <= nt; ++i)
        for (int j = 1; j <= np; ++j)
            for (int k = 1; k <= nr; ++k) {
                for (int m = 0; m < 8; ++m)
                    c[static_cast<std::size_t>(m)] =
                        polar_to_cartesian(grid.theta(std::min(i + (m & 1), grid.n_theta)),
                                           grid.phi(std::min(j + ((m >> 1) & 1), grid.n_phi)),
                                           grid.dist(std::min(k + ((m >> 2) & 1), grid.n_r)), origin);
                for (std::size_t a = 0; a < 8; ++a)
                    for (std::size_t b = a + 1; b < 8; ++b)
                        worst = std::max(worst, distance(c[a], c[b]));
            }
    return worst;
}

bool within_coverage(const PolarGrid &grid, const Vec3 &origin, const Vec3 &p)
{
    const PolarCoords c = cartesian_to_polar(p, origin);
    const double th = rad2deg(c.theta), ph = rad2deg(c.phi);
    return th >= grid.theta_min_deg && th <= grid.theta_max_deg && ph >= grid.phi_min_deg && ph <= grid.phi_max_deg &&
           c.d >= grid.d_min && c.d <= grid.d_max;
}

std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::Exhaustive: return "exhaustive";
    case Strategy::FarField: return "far_field";
    case Strategy::TwoStageNearField: return "two_stage";
    case Strategy::ExternalPrediction: return "external";
    }
    return "unknown";
}

Strategy strategy_from_string(const std::string &name)
{
    for (Strategy s : {Strategy::Exhaustive, Strategy::FarField, Strategy::TwoStageNearField,
                       Strategy::ExternalPrediction})
        if (to_string(s) == name)
            return s;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

std::vector<BeamTrainingResult> beam_train(const Eigen::VectorXcd &h, const NearFieldCodebook &near,
                                           const FarFieldCodebook &far, const std::vector<Strategy> &strategies,
                                           double p_r, double sigma2)
{
    if (h.size() == 0 || h.norm() == 0.0)
        throw DegenerateChannel("beam_train: zero channel");
    if (near.grid().n_theta != far.grid().n_theta || near.grid().n_phi != far.grid().n_phi)
        throw ShapeMismatch("beam_train: far-field angles do not match the near-field grid");

    const std::vector<double> g = near.gains(h);
    const std::size_t best = argmax_first(g);
    const double ref = g[best];
    if (ref == 0.0)
        throw UndefinedReference("beam_train: exhaustive winner has zero gain");

    std::optional<std::vector<double>> g_far;
    std::optional<std::size_t> best_far;
    auto far_sweep = [&]() {
        if (!g_far) {
            g_far = far.gains(h);
            best_far = argmax_first(*g_far);
        }
    };

    std::vector<BeamTrainingResult> out;
    for (Strategy s : strategies) {
        BeamTrainingResult r;
        r.strategy = s;
        switch (s) {
        case Strategy::Exhaustive:
            r.chosen_index = static_cast<int>(best) + 1;
            r.sweeps = near.size();
            r.gain = ref;
            break;
        case Strategy::FarField:
            far_sweep();
            r.chosen_index = static_cast<int>(*best_far) + 1;
            r.sweeps = far.size();
            r.gain = (*g_far)[*best_far];
            break;
        case Strategy::TwoStageNearField: {
            far_sweep();
            const auto [kt, kp] = far.angles_of(static_cast<int>(*best_far) + 1);
            const std::vector<double> ring = near.ring_gains(kt, kp, h);
            const std::size_t kr = argmax_first(ring);
            r.chosen_index = global_index({kt, kp, static_cast<int>(kr) + 1}, near.grid());
            r.sweeps = far.size() + ring.size();
            r.gain = ring[kr];
            break;
        }
        case Strategy::ExternalPrediction:
            throw std::invalid_argument("beam_train: external predictions are scored with score_external_prediction");
        }
        r.rate = rate_from_gain(r.gain, p_r, sigma2);
        r.norm_gain = r.gain / ref;
        out.push_back(r);
    }
    return out;
}

BeamTrainingResult beam_train(const Eigen::VectorXcd &h, const NearFieldCodebook &near, const FarFieldCodebook &far,
                              Strategy strategy, double p_r, double sigma2)
{
    return beam_train(h, near, far, std::vector<Strategy>{strategy}, p_r, sigma2).front();
}

PairedInterval paired_interval(const std::vector<double> &d)
{
    PairedInterval pi;
    pi.n = d.size();
    if (d.empty())
        return pi;
    double mean = 0.0;
    for (double x : d)
        mean += x;
    mean /= static_cast<double>(d.size());
    double ss = 0.0;
    for (double x : d)
        ss += (x - mean) * (x - mean);
    pi.mean = mean;
    if (d.size() < 2) {
        pi.lower = -std::numeric_limits<double>::infinity();
        pi.upper = std::numeric_limits<double>::infinity();
        return pi;
    }
    const double se = std::sqrt(ss / static_cast<double>(d.size() - 1) / static_cast<double>(d.size()));
    const double t = student_t975(d.size() - 1);
    pi.lower = mean - t * se;
    pi.upper = mean + t * se;
    return pi;
}

EvaluationReport evaluate_dataset(const std::vector<EvalFrame> &frames, const NearFieldCodebook &near,
                                  const FarFieldCodebook &far, const std::vector<Strategy> &strategies, double p_r,
                                  double sigma2)
{
    EvaluationReport rep;
    rep.strategies = strategies;
    struct Acc {
        std::size_t n = 0;
        double gain = 0.0, rate = 0.0;
    };
    std::map<std::string, std::map<Strategy, Acc>> acc;
    for (const auto &f : frames) {
        const auto results = beam_train(f.h, near, far, strategies, p_r, sigma2);
        std::vector<std::string> cells{"all", f.los ? "los" : "nlos", f.difficulty == Difficulty::Hard ? "hard" : "easy"};
        for (const auto &r : results) {
            rep.per_frame_norm_gain[r.strategy].push_back(r.norm_gain);
            rep.per_frame_rate[r.strategy].push_back(r.rate);
            for (const auto &c : cells) {
                Acc &a = acc[c][r.strategy];
                ++a.n;
                a.gain += r.norm_gain;
                a.rate += r.rate;
            }
        }
    }
    for (const auto &c : kEvaluationCells)
        for (Strategy s : strategies) {
            const auto it = acc.find(c);
            if (it == acc.end() || it->second[s].n == 0) {
                rep.cells[c][s] = std::nullopt;
                continue;
            }
            const Acc &a = it->second[s];
            rep.cells[c][s] = StrategyCell{a.n, a.gain / static_cast<double>(a.n), a.rate / static_cast<double>(a.n)};
        }
    const bool has_two = std::find(strategies.begin(), strategies.end(), Strategy::TwoStageNearField) != strategies.end();
    const bool has_far = std::find(strategies.begin(), strategies.end(), Strategy::FarField) != strategies.end();
    if (has_two && has_far && !frames.empty()) {
        const auto &a = rep.per_frame_norm_gain[Strategy::TwoStageNearField];
        const auto &b = rep.per_frame_norm_gain[Strategy::FarField];
        std::vector<double> d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            d[i] = a[i] - b[i];
        rep.two_stage_minus_far_field = paired_interval(d);
    }
    return rep;
}

nlohmann::json EvaluationReport::to_json() const
{
    nlohmann::json j;
    j["strategies"] = nlohmann::json::array();
    for (Strategy s : strategies)
        j["strategies"].push_back(to_string(s));
    nlohmann::json cj = nlohmann::json::object();
    for (const auto &c : kEvaluationCells) {
        nlohmann::json row = nlohmann::json::object();
        const auto it = cells.find(c);
        for (Strategy s : strategies) {
            if (it == cells.end() || !it->second.count(s) || !it->second.at(s)) {
                row[to_string(s)] = nullptr;
                continue;
            }
            const StrategyCell &v = *it->second.at(s);
            row[to_string(s)] = {{"frames", v.frames}, {"mean_norm_gain", v.mean_norm_gain}, {"mean_rate", v.mean_rate}};
        }
        cj[c] = row;
    }
    j["cells"] = cj;
    if (two_stage_minus_far_field) {
        const auto &p = *two_stage_minus_far_field;
        j["two_stage_minus_far_field_norm_gain"] = {
            {"n", p.n}, {"mean", p.mean}, {"ci95", {p.lower, p.upper}}};
    }
    return j;
}

std::string EvaluationReport::to_csv() const
{
    std::ostringstream os;
    os.precision(10);
    os << "cell,strategy,frames,mean_norm_gain,mean_rate\n";
    for (const auto &c : kEvaluationCells) {
        const auto it = cells.find(c);
        for (Strategy s : strategies) {
            os << c << ',' << to_string(s) << ',';
            if (it == cells.end() || !it->second.count(s) || !it->second.at(s)) {
                os << "0,,\n";
                continue;
            }
            const StrategyCell &v = *it->second.at(s);
            os << v.frames << ',' << v.mean_norm_gain << ',' << v.mean_rate << '\n';
        }
    }
    return os.str();
}

ExternalScore score_external_prediction(const std::vector<PolarTuple> &predictions,
                                        const std::vector<EvalFrame> &frames, const NearFieldCodebook &near)
{
    if (predictions.size() != frames.size())
        throw ShapeMismatch("score_external_prediction: " + std::to_string(predictions.size()) + " predictions for " +
                            std::to_string(frames.size()) + " frames");
    ExternalScore out;
    double sum = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const EvalFrame &f = frames[i];
        double score = 0.0;
        try {
            if (f.top1_global < 1)
                throw UndefinedReference("frame has no labeled optimum");
            const int k = global_index(predictions[i], near.grid());
            const double ref = std::norm(near.correlation(f.top1_global, f.h));
            if (ref == 0.0)
                throw UndefinedReference("labeled optimum has zero gain");
            score = std::norm(near.correlation(k, f.h)) / ref;
        } catch (const std::exception &e) {
            out.violations.push_back({i, e.what()});
            score = 0.0;
        }
        out.per_frame.push_back(score);
        sum += score;
    }
    out.mean_norm_gain = frames.empty() ? 0.0 : sum / static_cast<double>(frames.size());
    return out;
}

} // namespace nff
