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

#include "nff/raytrace.hpp"
#include "nff/vec3.hpp"

// Vectorized steering-vector correlations. Codewords are never materialized: each term is formed
// from the element offsets and reduced with a polynomial sincos accurate to about 1e-13.
namespace nff::detail {

struct ElementTable {
    std::vector<double> x, y, z, q; // offsets from the origin and their squared norms
    double inv_sqrt_m = 1.0;

    std::size_t size() const { return x.size(); }
};

ElementTable element_table(const ArrayGeometry &array, const Vec3 &origin);

/// For each distance d[i]: sum_m exp(+j 2 pi r_m / lambda) h_m / sqrt(M), r_m = |d u - offset_m|.
/// This is w^H h for the spherical codeword focused at origin + d u.
void spherical_correlations(const ElementTable &table, const double *h_re, const double *h_im, const Vec3 &u,
                            const double *distances, std::size_t count, double inv_lambda, std::complex<double> *out);

/// sum_m exp(-j 2 pi <u, offset_m> / lambda) h_m / sqrt(M): w^H h for the planar steering vector.
std::complex<double> planar_correlation(const ElementTable &table, const double *h_re, const double *h_im,
                                        const Vec3 &u, double inv_lambda);

} // namespace nff::detail
