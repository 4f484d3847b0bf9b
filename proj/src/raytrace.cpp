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

#include "nff/raytrace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "nff/constants.hpp"
#include "nff/errors.hpp"

namespace nff {

ArrayGeometry make_upa(int m_y, int m_z, double f_c, const Vec3 &center, double spacing_wavelengths)
{
    if (m_y < 1 || m_z < 1)
        throw std::invalid_argument("make_upa: element counts must be positive");
    if (f_c <= 0.0 || spacing_wavelengths <= 0.0)
        throw std::invalid_argument("make_upa: carrier and spacing must be positive");
    ArrayGeometry a;
    a.m_y = m_y;
    a.m_z = m_z;
    a.spacing = spacing_wavelengths * wavelength(f_c);
    a.center = center;
    a.elements.reserve(static_cast<std::size_t>(m_y) * static_cast<std::size_t>(m_z));
    for (int iy = 0; iy < m_y; ++iy)
        for (int iz = 0; iz < m_z; ++iz)
            a.elements.push_back(center + Vec3{0.0, (iy - 0.5 * (m_y - 1)) * a.spacing, (iz - 0.5 * (m_z - 1)) * a.spacing});
    return a;
}

std::complex<double> fresnel_coefficient(const Material &material, double frequency_hz, double incidence_angle,
                                         Polarization polarization)
{
    if (!(incidence_angle >= 0.0 && incidence_angle < 0.5 * kPi))
        throw std::invalid_argument("fresnel_coefficient: incidence angle must lie in [0, pi/2)");
    if (frequency_hz < 6e9 * (1.0 - 1e-9) || frequency_hz > 24e9 * (1.0 + 1e-9))
        throw std::invalid_argument("fresnel_coefficient: frequency outside [6, 24] GHz");
    if (material.kind != MaterialKind::Custom)
        to_string(material.kind); // throws UnknownMaterial for out-of-range kinds

    const std::complex<double> eta = material.complex_permittivity(frequency_hz);
    if (eta.real() < 1.0 || eta.imag() > 0.0)
        throw std::invalid_argument("fresnel_coefficient: non-physical material parameters");
    const double c = std::cos(incidence_angle);
    const double s2 = std::sin(incidence_angle) * std::sin(incidence_angle);
    const std::complex<double> root = std::sqrt(eta - s2);
    if (polarization == Polarization::TE)
        return (c - root) / (c + root);
    return (eta * c - root) / (eta * c + root);
}

namespace {

using CVec3 = std::array<std::complex<double>, 3>;

std::complex<double> cdot(const CVec3 &e, const Vec3 &v) { return e[0] * v.x + e[1] * v.y + e[2] * v.z; }

// Unit vector of the vertical dipole field for propagation direction k.
Vec3 vertical_basis(const Vec3 &k)
{
    const Vec3 z{0.0, 0.0, 1.0};
    Vec3 v = z - k * dot(z, k);
    if (norm(v) < 1e-12) {
        const Vec3 x{1.0, 0.0, 0.0};
        v = x - k * dot(x, k);
    }
    return normalized(v);
}

struct Chain {
    std::array<int, 3> faces{};
    std::array<Vec3, 3> images{}; // images[i]: target mirrored through faces[i..depth-1]
    int depth = 0;
};

// Reflection points of `chain` seen from `start`. With tol == 0 this is the exact validity test;
// a positive tol gives a conservative pre-filter shared across the array.
bool chain_points(const std::vector<Face> &faces, const Chain &chain, const Vec3 &start, double tol,
                  std::array<Vec3, 3> &points)
{
    Vec3 prev = start;
    for (int i = 0; i < chain.depth; ++i) {
        const Face &f = faces[static_cast<std::size_t>(chain.faces[static_cast<std::size_t>(i)])];
        const Vec3 &img = chain.images[static_cast<std::size_t>(i)];
        const double sp = f.signed_distance(prev);
        const double si = f.signed_distance(img);
        if (tol == 0.0) {
            if (!(sp > 1e-9 && si < -1e-9))
                return false;
        } else if (!(sp > -tol && si < tol && sp - si > 1e-12)) {
            return false;
        }
        const double t = sp / (sp - si);
        Vec3 r = prev + (img - prev) * t;
        r[f.axis] = f.coord;
        if (tol == 0.0 ? !f.contains(r) : f.outside_distance(r) > tol)
            return false;
        points[static_cast<std::size_t>(i)] = r;
        prev = r;
    }
    return true;
}

std::complex<double> polarization_factor(const Scene &scene, const std::vector<Face> &faces, const Chain &chain,
                                         const std::array<Vec3, 3> &points, const Vec3 &antenna, const Vec3 &target,
                                         double f_c, bool scalar_tm, std::vector<Surface> &surfaces)
{
    surfaces.clear();
    const int n = chain.depth;
    Vec3 here = target;
    Vec3 k_in = normalized((n > 0 ? points[static_cast<std::size_t>(n - 1)] : antenna) - target);
    const Vec3 e0 = vertical_basis(k_in);
    CVec3 e{e0.x, e0.y, e0.z};
    std::complex<double> scalar = 1.0;
    std::vector<Surface> reversed;
    for (int i = n - 1; i >= 0; --i) {
        const Face &f = faces[static_cast<std::size_t>(chain.faces[static_cast<std::size_t>(i)])];
        here = points[static_cast<std::size_t>(i)];
        const Vec3 next = i > 0 ? points[static_cast<std::size_t>(i - 1)] : antenna;
        const Vec3 k_out = normalized(next - here);
        const Vec3 nrm = f.normal();
        Material mat = f.material;
        if (f.building < 0)
            mat = scene.ground_material_at(here.x, here.y).first;
        reversed.push_back({nrm, mat, chain.faces[static_cast<std::size_t>(i)]});

        const double cos_theta = std::clamp(-dot(k_in, nrm), 0.0, 1.0);
        const double theta = std::min(std::acos(cos_theta), 0.5 * kPi - 1e-12);
        const std::complex<double> g_te = fresnel_coefficient(mat, f_c, theta, Polarization::TE);
        const std::complex<double> g_tm = fresnel_coefficient(mat, f_c, theta, Polarization::TM);
        if (scalar_tm) {
            scalar *= g_tm;
        } else {
            Vec3 s = cross(k_in, nrm);
            if (norm(s) < 1e-12)
                s = cross(k_in, std::abs(k_in.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0});
            s = normalized(s);
            const Vec3 p_in = cross(s, k_in);
            const Vec3 p_out = cross(s, k_out);
            const std::complex<double> es = cdot(e, s);
            const std::complex<double> ep = cdot(e, p_in);
            for (int a = 0; a < 3; ++a)
                e[static_cast<std::size_t>(a)] = g_te * es * s[a] + g_tm * ep * p_out[a];
        }
        k_in = k_out;
    }
    surfaces.assign(reversed.rbegin(), reversed.rend());
    if (scalar_tm)
        return scalar;
    return cdot(e, vertical_basis(k_in));
}

bool point_under_building(const Scene &scene, const Vec3 &p)
{
    for (const auto &b : scene.buildings)
        if (p.x > b.footprint.x0 && p.x < b.footprint.x1 && p.y > b.footprint.y0 && p.y < b.footprint.y1)
            return true;
    return false;
}

// Exact validation + gain for one antenna. Returns false when the chain yields no valid path.
bool build_path(const Scene &scene, const std::vector<Face> &faces, const Chain &chain, const Vec3 &antenna,
                const Vec3 &target, double f_c, const TraceOptions &options, Path &out)
{
    std::array<Vec3, 3> pts;
    if (!chain_points(faces, chain, antenna, 0.0, pts))
        return false;
    const int n = chain.depth;
    for (int i = 0; i < n; ++i) {
        const Face &f = faces[static_cast<std::size_t>(chain.faces[static_cast<std::size_t>(i)])];
        if (f.building < 0 && point_under_building(scene, pts[static_cast<std::size_t>(i)]))
            return false;
    }
    if (faces[static_cast<std::size_t>(chain.faces[static_cast<std::size_t>(n - 1)])].signed_distance(target) <= 1e-9)
        return false;

    double length = 0.0;
    Vec3 prev = antenna;
    for (int i = 0; i <= n; ++i) {
        const Vec3 next = i < n ? pts[static_cast<std::size_t>(i)] : target;
        const double seg = distance(prev, next);
        if (seg <= kRayEpsilon || los_blocked(scene, prev, next))
            return false;
        length += seg;
        prev = next;
    }

    out.interaction_points.assign(pts.begin(), pts.begin() + n);
    out.length = length;
    out.is_los = false;
    const std::complex<double> pol =
        polarization_factor(scene, faces, chain, pts, antenna, target, f_c, options.scalar_tm_approx, out.surfaces);
    out.gain = wavelength(f_c) / (4.0 * kPi * length) * pol;
    return true;
}

// Mutual visibility of two faces: each has some area strictly in front of the other.
bool faces_see_each_other(const Face &a, const Face &b)
{
    auto front_of = [](const Face &ref, const Face &other) {
        double lo, hi;
        if (other.axis == ref.axis) {
            lo = hi = other.coord;
        } else if ((other.axis + 1) % 3 == ref.axis) {
            lo = other.u0;
            hi = other.u1;
        } else {
            lo = other.v0;
            hi = other.v1;
        }
        return ref.normal_sign > 0.0 ? hi > ref.coord + 1e-9 : lo < ref.coord - 1e-9;
    };
    return front_of(a, b) && front_of(b, a);
}

std::vector<Chain> enumerate_chains(const std::vector<Face> &faces, const Vec3 &target, int max_depth)
{
    const int nf = static_cast<int>(faces.size());
    std::vector<std::vector<int>> visible(static_cast<std::size_t>(nf));
    for (int i = 0; i < nf; ++i)
        for (int j = 0; j < nf; ++j)
            if (i != j && faces_see_each_other(faces[static_cast<std::size_t>(i)], faces[static_cast<std::size_t>(j)]))
                visible[static_cast<std::size_t>(i)].push_back(j);

    std::vector<Chain> out;
    // Chains are grown from the target side: the newest face becomes faces[0].
    auto grow = [&](auto &&self, const Chain &c) -> void {
        out.push_back(c);
        if (c.depth >= max_depth)
            return;
        const int first = c.faces[0];
        for (int j : visible[static_cast<std::size_t>(first)]) {
            const Face &f = faces[static_cast<std::size_t>(j)];
            if (f.signed_distance(c.images[0]) <= 1e-9)
                continue;
            Chain n;
            n.depth = c.depth + 1;
            n.faces[0] = j;
            n.images[0] = f.mirror(c.images[0]);
            for (int k = 0; k < c.depth; ++k) {
                n.faces[static_cast<std::size_t>(k + 1)] = c.faces[static_cast<std::size_t>(k)];
                n.images[static_cast<std::size_t>(k + 1)] = c.images[static_cast<std::size_t>(k)];
            }
            self(self, n);
        }
    };
    if (max_depth >= 1) {
        for (int i = 0; i < nf; ++i) {
            const Face &f = faces[static_cast<std::size_t>(i)];
            if (f.signed_distance(target) <= 1e-9)
                continue;
            Chain c;
            c.depth = 1;
            c.faces[0] = i;
            c.images[0] = f.mirror(target);
            grow(grow, c);
        }
    }
    return out;
}

void check_endpoint(const Scene &scene, const Vec3 &p, const char *what)
{
    const bool above = scene.has_ground ? p.z > 0.0 : true;
    if (!above || p.z > scene.bounds.z_max || !scene.bounds.contains_xy(p.x, p.y))
        throw std::invalid_argument(std::string("trace: ") + what + " outside the scene volume");
    if (scene.building_containing(p) >= 0)
        throw std::invalid_argument(std::string("trace: ") + what + " inside a building");
}

void sort_paths(std::vector<Path> &paths)
{
    std::stable_sort(paths.begin(), paths.end(), [](const Path &a, const Path &b) {
        if (a.depth() != b.depth())
            return a.depth() < b.depth();
        return a.length < b.length;
    });
}

} // namespace

PathSet trace_paths(const Scene &scene, const ArrayGeometry &array, const Vec3 &target, double f_c,
                    const TraceOptions &options)
{
    if (options.max_depth < 0 || options.max_depth > 3)
        throw std::invalid_argument("trace: max_depth must lie in [0, 3]");
    if (array.size() == 0)
        throw std::invalid_argument("trace: empty array");
    check_endpoint(scene, target, "target");

    const double lambda = wavelength(f_c);
    const std::vector<Face> faces = reflective_faces(scene);
    const std::vector<Chain> chains = enumerate_chains(faces, target, options.max_depth);
    const double margin = std::max(0.25, 4.0 * array.aperture_diagonal());

    PathSet out;
    out.per_antenna.resize(array.size());
    for (std::size_t m = 0; m < array.size(); ++m) {
        const Vec3 &p = array.elements[m];
        if (!los_blocked(scene, p, target)) {
            Path los;
            los.is_los = true;
            los.length = distance(p, target);
            los.gain = lambda / (4.0 * kPi * los.length);
            out.per_antenna[m].push_back(std::move(los));
        }
    }

    std::array<Vec3, 3> pts;
    for (const Chain &chain : chains) {
        if (array.size() > 1 && !chain_points(faces, chain, array.center, margin, pts))
            continue;
        for (std::size_t m = 0; m < array.size(); ++m) {
            Path path;
            if (build_path(scene, faces, chain, array.elements[m], target, f_c, options, path))
                out.per_antenna[m].push_back(std::move(path));
        }
    }
    for (auto &paths : out.per_antenna)
        sort_paths(paths);
    return out;
}

std::vector<Path> trace_point_to_point(const Scene &scene, const Vec3 &source, const Vec3 &target, double f_c,
                                       const TraceOptions &options)
{
    check_endpoint(scene, source, "source");
    ArrayGeometry single;
    single.m_y = 1;
    single.m_z = 1;
    single.center = source;
    single.elements = {source};
    return std::move(trace_paths(scene, single, target, f_c, options).per_antenna.front());
}

double rms_delay_spread(const std::vector<Path> &paths)
{
    if (paths.empty())
        throw NoPaths("rms_delay_spread: no paths");
    double w_sum = 0.0, tau_mean = 0.0;
    for (const auto &p : paths) {
        const double w = std::norm(p.gain);
        w_sum += w;
        tau_mean += w * p.length / kSpeedOfLight;
    }
    if (w_sum <= 0.0)
        return 0.0;
    tau_mean /= w_sum;
    double var = 0.0;
    for (const auto &p : paths) {
        const double dt = p.length / kSpeedOfLight - tau_mean;
        var += std::norm(p.gain) * dt * dt;
    }
    return std::sqrt(std::max(0.0, var / w_sum));
}

} // namespace nff
