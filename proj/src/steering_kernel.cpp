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

#include "nff/detail/steering_kernel.hpp"

#include <cmath>

#include "nff/constants.hpp"

namespace nff::detail {

namespace {

constexpr double kRoundMagic = 6755399441055744.0; // 1.5 * 2^52

// cos and sin of 2 pi * frac for frac in [-0.5, 0.5], via the half angle and double-angle identities.
#pragma omp declare simd
inline void sincos_cycles(double frac, double &c, double &s)
{
    const double h = kPi * frac;
    const double h2 = h * h;
    double ps = -1.0 / 121645100408832000.0;        // -1/19!
    ps = ps * h2 + 1.0 / 355687428096000.0;         // 1/17!
    ps = ps * h2 - 1.0 / 1307674368000.0;           // -1/15!
    ps = ps * h2 + 1.0 / 6227020800.0;              // 1/13!
    ps = ps * h2 - 1.0 / 39916800.0;                // -1/11!
    ps = ps * h2 + 1.0 / 362880.0;                  // 1/9!
    ps = ps * h2 - 1.0 / 5040.0;                    // -1/7!
    ps = ps * h2 + 1.0 / 120.0;                     // 1/5!
    ps = ps * h2 - 1.0 / 6.0;                       // -1/3!
    ps = ps * h2 + 1.0;
    const double sh = h * ps;
    double pc = 1.0 / 2432902008176640000.0;        // 1/20!
    pc = pc * h2 - 1.0 / 6402373705728000.0;        // -1/18!
    pc = pc * h2 + 1.0 / 20922789888000.0;          // 1/16!
    pc = pc * h2 - 1.0 / 87178291200.0;             // -1/14!
    pc = pc * h2 + 1.0 / 479001600.0;               // 1/12!
    pc = pc * h2 - 1.0 / 3628800.0;                 // -1/10!
    pc = pc * h2 + 1.0 / 40320.0;                   // 1/8!
    pc = pc * h2 - 1.0 / 720.0;                     // -1/6!
    pc = pc * h2 + 1.0 / 24.0;                      // 1/4!
    pc = pc * h2 - 0.5;
    pc = pc * h2 + 1.0;
    c = pc * pc - sh * sh;
    s = 2.0 * sh * pc;
}

} // namespace

ElementTable element_table(const ArrayGeometry &array, const Vec3 &origin)
{
    ElementTable t;
    const std::size_t n = array.size();
    t.x.resize(n);
    t.y.resize(n);
    t.z.resize(n);
    t.q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 r = array.elements[i] - origin;
        t.x[i] = r.x;
        t.y[i] = r.y;
        t.z[i] = r.z;
        t.q[i] = dot(r, r);
    }
    t.inv_sqrt_m = n > 0 ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
    return t;
}

__attribute__((target_clones("avx2", "default"))) void
spherical_correlations(const ElementTable &table, const double *h_re, const double *h_im, const Vec3 &u,
                       const double *distances, std::size_t count, double inv_lambda, std::complex<double> *out)
{
    const std::size_t n = table.size();
    const double *xs = table.x.data();
    const double *ys = table.y.data();
    const double *zs = table.z.data();
    const double *qs = table.q.data();
    for (std::size_t i = 0; i < count; ++i) {
        const double d = distances[i];
        const double dd = d * d;
        const double ax = 2.0 * d * u.x, ay = 2.0 * d * u.y, az = 2.0 * d * u.z;
        double sr = 0.0, si = 0.0;
#pragma omp simd reduction(+ : sr, si)
        for (std::size_t m = 0; m < n; ++m) {
            const double r = std::sqrt(dd - (ax * xs[m] + ay * ys[m] + az * zs[m]) + qs[m]);
            const double cyc = r * inv_lambda;
            const double frac = cyc - ((cyc + kRoundMagic) - kRoundMagic);
            double c, s;
            sincos_cycles(frac, c, s);
            sr += c * h_re[m] - s * h_im[m];
            si += c * h_im[m] + s * h_re[m];
        }
        out[i] = {sr * table.inv_sqrt_m, si * table.inv_sqrt_m};
    }
}

__attribute__((target_clones("avx2", "default"))) std::complex<double>
planar_correlation(const ElementTable &table, const double *h_re, const double *h_im, const Vec3 &u,
                   double inv_lambda)
{
    const std::size_t n = table.size();
    const double *xs = table.x.data();
    const double *ys = table.y.data();
    const double *zs = table.z.data();
    double sr = 0.0, si = 0.0;
#pragma omp simd reduction(+ : sr, si)
    for (std::size_t m = 0; m < n; ++m) {
        const double cyc = -(u.x * xs[m] + u.y * ys[m] + u.z * zs[m]) * inv_lambda;
        const double frac = cyc - ((cyc + kRoundMagic) - kRoundMagic);
        double c, s;
        sincos_cycles(frac, c, s);
        sr += c * h_re[m] - s * h_im[m];
        si += c * h_im[m] + s * h_re[m];
    }
    return {sr * table.inv_sqrt_m, si * table.inv_sqrt_m};
}

} // namespace nff::detail
