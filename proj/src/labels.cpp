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

#include "nff/labels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nff/errors.hpp"
#include "nff/rng.hpp"

namespace nff {

namespace {

void require_unit(const Eigen::VectorXcd &w, const char *what)
{
    if (std::abs(w.norm() - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(what) + ": beamformer must have unit norm");
}

void require_same_length(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b)
{
    if (a.size() != b.size())
        throw ShapeMismatch("beamformer and channel lengths differ");
}

} // namespace

double rate_from_gain(double gain, double p_r, double sigma2)
{
    if (!(sigma2 > 0.0) || !(p_r > 0.0))
        throw std::invalid_argument("achievable_rate: P_r and sigma2 must be positive");
    return std::log2(1.0 + p_r * gain / sigma2);
}

double achievable_rate(const Eigen::VectorXcd &w, const Eigen::VectorXcd &h, double p_r, double sigma2)
{
    require_same_length(w, h);
    require_unit(w, "achievable_rate");
    return rate_from_gain(std::norm(w.dot(h)), p_r, sigma2);
}

double normalized_gain(const Eigen::VectorXcd &w, const Eigen::VectorXcd &h, const Eigen::VectorXcd &w_opt)
{
    require_same_length(w, h);
    require_same_length(w_opt, h);
    require_unit(w, "normalized_gain");
    require_unit(w_opt, "normalized_gain");
    const double ref = std::norm(w_opt.dot(h));
    if (ref == 0.0)
        throw UndefinedReference("normalized_gain: reference beam has zero gain");
    return std::norm(w.dot(h)) / ref;
}

std::vector<std::size_t> top_n_indices(const std::vector<double> &values, std::size_t n, double rel_tol)
{
    n = std::min(n, values.size());
    std::vector<char> taken(values.size(), 0);
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        double best = -1.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!taken[i] && values[i] > best)
                best = values[i];
        const double floor = best - std::abs(best) * rel_tol;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!taken[i] && values[i] >= floor) {
                taken[i] = 1;
                out.push_back(i);
                break;
            }
    }
    return out;
}

BeamLabel label_beams(const Eigen::VectorXcd &h, const NearFieldCodebook &codebook, double p_r, double sigma2)
{
    if (codebook.size() == 0)
        throw std::invalid_argument("label_beams: empty codebook");
    if (h.size() == 0 || h.cwiseAbs2().maxCoeff() == 0.0)
        throw DegenerateChannel("label_beams: channel is identically zero");
    const std::vector<double> g = codebook.gains(h);
    if (g.size() < kTopBeams)
        throw std::invalid_argument("label_beams: codebook smaller than the label width");
    const double peak = *std::max_element(g.begin(), g.end());
    if (peak == 0.0)
        throw DegenerateChannel("label_beams: every codeword is orthogonal to the channel");
    // Rank on a fixed grid relative to the peak so rounding noise cannot split exact ties.
    std::vector<double> key(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        key[i] = std::nearbyint(g[i] / peak * kGainGrid);
    const auto top = top_n_indices(key, kTopBeams);
    BeamLabel label;
    for (std::size_t i = 0; i < kTopBeams; ++i) {
        const int k = static_cast<int>(top[i]) + 1;
        label.top_global[i] = k;
        label.top_tuples[i] = decompose_index(k, codebook.grid());
        label.top_gains[i] = i == 0 ? 1.0 : key[top[i]] / key[top[0]];
    }
    label.top1_rate = rate_from_gain(g[top[0]], p_r, sigma2);
    return label;
}

bool los_indicator(const PathSet &paths, LosRule rule, std::size_t reference_antenna)
{
    auto has_los = [](const std::vector<Path> &list) {
        for (const auto &p : list)
            if (p.is_los)
                return true;
        return false;
    };
    if (rule == LosRule::ReferenceAntenna) {
        if (reference_antenna >= paths.antennas())
            throw IndexError("los_indicator: reference antenna out of range");
        return has_los(paths.per_antenna[reference_antenna]);
    }
    for (const auto &list : paths.per_antenna)
        if (has_los(list))
            return true;
    return false;
}

GpsObservation gps_observe(const Vec3 &u, double sigma2_gps, std::uint64_t seed)
{
    if (!(sigma2_gps >= 0.0))
        throw std::invalid_argument("gps_observe: variance must be non-negative");
    GpsObservation obs;
    obs.sigma2_gps = sigma2_gps;
    if (sigma2_gps == 0.0) {
        obs.u_tilde = u;
        return obs;
    }
    Rng rng(seed);
    const double sd = std::sqrt(sigma2_gps);
    const double zx = rng.normal(), zy = rng.normal(), zz = rng.normal();
    obs.u_tilde = u + Vec3{sd * zx, sd * zy, sd * zz};
    return obs;
}

} // namespace nff
