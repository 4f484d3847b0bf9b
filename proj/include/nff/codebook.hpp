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

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nff/detail/steering_kernel.hpp"
#include "nff/raytrace.hpp"
#include "nff/vec3.hpp"

namespace nff {

/// Polar sampling grid. Angles are stored in degrees, samples include both interval endpoints.
struct PolarGrid {
    int n_theta = 20;
    int n_phi = 20;
    int n_r = 10;
    double theta_min_deg = -72.0, theta_max_deg = 72.0; // azimuth in the xy-plane from +x
    double phi_min_deg = 60.0, phi_max_deg = 150.0;     // zenith from +z
    double d_min = 20.0, d_max = 155.0;
    bool inverse_distance = false; // sample uniformly in 1/d instead of d

    std::size_t size() const
    {
        return static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi) * static_cast<std::size_t>(n_r);
    }
    std::size_t angle_count() const { return static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi); }
    // 1-based sample accessors; angles in radians.
    double theta(int k_theta) const;
    double phi(int k_phi) const;
    double dist(int k_r) const;
    std::vector<double> distances() const;
    void validate() const;

    bool operator==(const PolarGrid &) const = default;
};

/// 70 x 60 x 60 grid over the same region, used for localization.
PolarGrid localization_grid();

struct PolarTuple {
    int k_theta = 1;
    int k_phi = 1;
    int k_r = 1;

    bool operator==(const PolarTuple &) const = default;
};

/// k = (k_theta - 1) N_phi N_r + (k_phi - 1) N_r + k_r. Throws IndexError for out-of-range components.
int global_index(const PolarTuple &tuple, const PolarGrid &grid);
PolarTuple decompose_index(int k, const PolarGrid &grid);

/// Unit direction for azimuth theta and zenith phi.
Vec3 polar_direction(double theta, double phi);
/// o + d [sin(phi) cos(theta), sin(phi) sin(theta), cos(phi)]
Vec3 polar_to_cartesian(double theta, double phi, double d, const Vec3 &origin);

struct PolarCoords {
    double theta = 0.0; // radians, atan2 convention
    double phi = 0.0;   // radians, [0, pi]
    double d = 0.0;
};
PolarCoords cartesian_to_polar(const Vec3 &p, const Vec3 &origin);

Vec3 focus_point(const PolarTuple &tuple, const PolarGrid &grid, const Vec3 &origin);

/// w_m = exp(-j 2 pi f_c |p - p_m| / c) / sqrt(M)
Eigen::VectorXcd near_field_codeword(const Vec3 &focus, const ArrayGeometry &array, double f_c);

/// w_m = exp(+j 2 pi f_c <u, p_m - o> / c) / sqrt(M), the d -> infinity limit of the near-field codeword
/// after removing the common phase exp(-j 2 pi f_c d / c).
Eigen::VectorXcd far_field_codeword(double theta, double phi, const ArrayGeometry &array, double f_c,
                                    const Vec3 &origin);

/// Near-field codebook over a PolarGrid. Codewords are generated on demand; full sweeps use the
/// vectorized correlation kernel.
class NearFieldCodebook {
  public:
    NearFieldCodebook(const PolarGrid &grid, const ArrayGeometry &array, double f_c);
    NearFieldCodebook(const PolarGrid &grid, const ArrayGeometry &array, double f_c, const Vec3 &origin);

    const PolarGrid &grid() const { return grid_; }
    const ArrayGeometry &array() const { return array_; }
    double carrier() const { return f_c_; }
    const Vec3 &origin() const { return origin_; }
    std::size_t size() const { return grid_.size(); }

    Vec3 focus(int k) const; // k is the 1-based global index
    Eigen::VectorXcd codeword(int k) const;

    /// w_k^H h for all k; element k - 1 belongs to global index k.
    std::vector<std::complex<double>> correlations(const Eigen::VectorXcd &h) const;
    /// |w_k^H h|^2 for all k.
    std::vector<double> gains(const Eigen::VectorXcd &h) const;
    /// w_k^H h through the same kernel as the full sweep, so values match it bit for bit.
    std::complex<double> correlation(int k, const Eigen::VectorXcd &h) const;
    /// |w^H h|^2 along the distance ring at a fixed angle pair; element k_r - 1.
    std::vector<double> ring_gains(int k_theta, int k_phi, const Eigen::VectorXcd &h) const;

    nlohmann::json describe() const;

  private:
    PolarGrid grid_;
    ArrayGeometry array_;
    double f_c_;
    Vec3 origin_;
    detail::ElementTable table_;
    std::vector<double> dists_;
};

/// Planar steering codebook over the N_theta x N_phi angles of a PolarGrid.
/// Angular index a = (k_theta - 1) N_phi + k_phi.
class FarFieldCodebook {
  public:
    FarFieldCodebook(const PolarGrid &grid, const ArrayGeometry &array, double f_c);

    std::size_t size() const { return grid_.angle_count(); }
    const PolarGrid &grid() const { return grid_; }
    int angle_index(int k_theta, int k_phi) const;
    std::pair<int, int> angles_of(int a) const;
    Eigen::VectorXcd codeword(int a) const;
    std::vector<double> gains(const Eigen::VectorXcd &h) const; // element a - 1

  private:
    PolarGrid grid_;
    ArrayGeometry array_;
    double f_c_;
    detail::ElementTable table_;
};

nlohmann::json to_json(const PolarGrid &grid);
PolarGrid polar_grid_from_json(const nlohmann::json &doc);

} // namespace nff
