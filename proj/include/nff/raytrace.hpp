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

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "nff/materials.hpp"
#include "nff/scene.hpp"
#include "nff/vec3.hpp"

namespace nff {

/// Uniform planar array in the yz-plane, broadside towards +x, centered on `center`.
/// Elements are ordered row-major over (M_y, M_z): m = iy * M_z + iz.
struct ArrayGeometry {
    int m_y = 0;
    int m_z = 0;
    double spacing = 0.0;
    Vec3 center;
    std::vector<Vec3> elements;

    std::size_t size() const { return elements.size(); }
    /// Element nearest the geometric center: (M_y / 2, M_z / 2).
    std::size_t reference_index() const
    {
        return static_cast<std::size_t>(m_y / 2) * static_cast<std::size_t>(m_z) + static_cast<std::size_t>(m_z / 2);
    }
    double aperture_diagonal() const { return spacing * std::hypot(m_y - 1.0, m_z - 1.0); }
};

/// Half-wavelength UPA at carrier `f_c`.
ArrayGeometry make_upa(int m_y, int m_z, double f_c, const Vec3 &center, double spacing_wavelengths = 0.5);

struct Surface {
    Vec3 normal;
    Material material;
    int face = -1;
};

struct Path {
    std::vector<Vec3> interaction_points; // ordered from the antenna towards the target
    std::vector<Surface> surfaces;
    double length = 0.0;
    std::complex<double> gain;
    bool is_los = false;

    std::size_t depth() const { return interaction_points.size(); }
};

struct PathSet {
    std::vector<std::vector<Path>> per_antenna;

    std::size_t antennas() const { return per_antenna.size(); }
};

enum class Polarization { TE, TM };

/// Fresnel reflection coefficient for incidence angle measured from the surface normal.
/// Requires 0 <= angle < pi/2 and f in [6, 24] GHz.
std::complex<double> fresnel_coefficient(const Material &material, double frequency_hz, double incidence_angle,
                                         Polarization polarization);

struct TraceOptions {
    int max_depth = 3;
    /// Use the product of TM coefficients instead of full TE/TM polarization tracking.
    bool scalar_tm_approx = false;
};

/// All LoS + specular paths between a single point and the target (image method).
/// Paths are sorted by (depth, length). `source` plays the antenna role.
std::vector<Path> trace_point_to_point(const Scene &scene, const Vec3 &source, const Vec3 &target, double f_c,
                                       const TraceOptions &options = {});

/// Per-antenna tracing. Image points are computed once per reflector sequence and shared by all elements.
PathSet trace_paths(const Scene &scene, const ArrayGeometry &array, const Vec3 &target, double f_c,
                    const TraceOptions &options = {});

/// Power-weighted RMS delay spread in seconds. Throws NoPaths for an empty list.
double rms_delay_spread(const std::vector<Path> &paths);

} // namespace nff
