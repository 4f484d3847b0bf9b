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

#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace oracle {

namespace {

constexpr long double kC = 299792458.0L;
constexpr long double kTwoPi = 6.283185307179586476925286766559L;

// In-plane axes of a plane with normal along `axis`.
int axis_u(int axis) { return (axis + 1) % 3; }
int axis_v(int axis) { return (axis + 2) % 3; }

Vec3 point_on(const Plane &p, double u, double v)
{
    Vec3 q;
    q[p.axis] = p.coord;
    q[axis_u(p.axis)] = u;
    q[axis_v(p.axis)] = v;
    return q;
}

double side(const Plane &p, const Vec3 &q) { return p.sign * (q[p.axis] - p.coord); }

// Open-interior slab test of segment a-b against [lo, hi].
bool segment_in_box(const Vec3 &a, const Vec3 &b, const Vec3 &lo, const Vec3 &hi)
{
    double t0 = 0.0, t1 = 1.0;
    for (int i = 0; i < 3; ++i) {
        const double d = b[i] - a[i];
        if (std::abs(d) < 1e-15) {
            if (a[i] <= lo[i] || a[i] >= hi[i])
                return false;
            continue;
        }
        double ta = (lo[i] - a[i]) / d, tb = (hi[i] - a[i]) / d;
        if (ta > tb)
            std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    return t1 - t0 > 1e-12;
}

bool segment_hits(const nff::Scene &scene, const Vec3 &a, const Vec3 &b, double grow, int skip_a, int skip_b)
{
    for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
        const int bi = static_cast<int>(i);
        if (bi == skip_a || bi == skip_b)
            continue;
        const auto &bd = scene.buildings[i];
        const Vec3 lo{bd.footprint.x0 - grow, bd.footprint.y0 - grow, -1.0};
        const Vec3 hi{bd.footprint.x1 + grow, bd.footprint.y1 + grow, bd.height + grow};
        if (hi.x <= lo.x || hi.y <= lo.y || hi.z <= 0.0)
            continue;
        if (segment_in_box(a, b, lo, hi))
            return true;
    }
    return false;
}

struct Candidate {
    std::vector<int> faces;
    std::vector<const Plane *> planes;
    std::vector<int> owners; // building index per face, -1 for the ground
};

double path_length(const Vec3 &s, const Vec3 &t, const std::vector<const Plane *> &planes, const double *x)
{
    Vec3 prev = s;
    double len = 0.0;
    for (std::size_t i = 0; i < planes.size(); ++i) {
        const Vec3 q = point_on(*planes[i], x[2 * i], x[2 * i + 1]);
        len += nff::distance(prev, q);
        prev = q;
    }
    return len + nff::distance(prev, t);
}

// Windowed coarse-to-fine grid search of a convex objective over a product of boxes.
std::vector<double> minimize(const Vec3 &s, const Vec3 &t, const std::vector<const Plane *> &planes,
                             const std::vector<double> &lo, const std::vector<double> &hi, double resolution)
{
    const std::size_t dim = lo.size();
    const int n = dim <= 2 ? 21 : 11;
    std::vector<double> c(dim), w(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        c[i] = 0.5 * (lo[i] + hi[i]);
        w[i] = 0.5 * (hi[i] - lo[i]);
    }
    std::vector<double> x(dim), best = c;
    std::vector<int> idx(dim);
    double best_len = path_length(s, t, planes, c.data());
    for (;;) {
        const double start_len = best_len;
        std::vector<double> step(dim);
        for (std::size_t i = 0; i < dim; ++i)
            step[i] = 2.0 * w[i] / (n - 1);
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            for (std::size_t i = 0; i < dim; ++i)
                x[i] = std::clamp(c[i] - w[i] + step[i] * idx[i], lo[i], hi[i]);
            const double len = path_length(s, t, planes, x.data());
            if (len < best_len) {
                best_len = len;
                best = x;
            }
            std::size_t k = 0;
            while (k < dim && ++idx[k] == n)
                idx[k++] = 0;
            if (k == dim)
                break;
        }
        // Re-centre on an improvement; shrink the window only once the centre is the best grid point.
        const bool moved = best_len < start_len;
        c = best;
        if (moved)
            continue;
        double max_step = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            w[i] = 3.0 * step[i];
            max_step = std::max(max_step, step[i]);
        }
        if (max_step < 0.25 * resolution)
            return best;
    }
}

// Distance of (u, v) inside the rectangle from its border; negative outside.
double inset(const Plane &p, double u, double v)
{
    const int au = axis_u(p.axis), av = axis_v(p.axis);
    return std::min({u - p.lo[au], p.hi[au] - u, v - p.lo[av], p.hi[av] - v});
}

} // namespace

std::vector<Plane> planes_of(const nff::Scene &scene)
{
    std::vector<Plane> out;
    for (const auto &b : scene.buildings) {
        const Vec3 lo{b.footprint.x0, b.footprint.y0, 0.0};
        const Vec3 hi{b.footprint.x1, b.footprint.y1, b.height};
        auto face = [&](int axis, double coord, double sign) {
            Plane p;
            p.axis = axis;
            p.coord = coord;
            p.sign = sign;
            for (int i = 0; i < 3; ++i) {
                p.lo[i] = lo[i];
                p.hi[i] = hi[i];
            }
            out.push_back(p);
        };
        face(0, lo.x, -1.0);
        face(0, hi.x, +1.0);
        face(1, lo.y, -1.0);
        face(1, hi.y, +1.0);
        face(2, hi.z, +1.0);
    }
    if (scene.has_ground) {
        Plane g;
        g.axis = 2;
        g.coord = 0.0;
        g.lo[0] = scene.bounds.x0;
        g.hi[0] = scene.bounds.x1;
        g.lo[1] = scene.bounds.y0;
        g.hi[1] = scene.bounds.y1;
        out.push_back(g);
    }
    return out;
}

bool segment_hits_boxes(const nff::Scene &scene, const Vec3 &a, const Vec3 &b, double grow)
{
    return segment_hits(scene, a, b, grow, -1, -1);
}

SearchResult grid_search_paths(const nff::Scene &scene, const Vec3 &source, const Vec3 &target, int max_depth,
                               double resolution, double edge_skip)
{
    const std::vector<Plane> planes = planes_of(scene);
    const int nb = static_cast<int>(scene.buildings.size());
    auto owner = [&](int f) { return f < 5 * nb ? f / 5 : -1; };
    SearchResult res;

    // Direct path.
    if (!segment_hits(scene, source, target, 0.0, -1, -1)) {
        if (segment_hits(scene, source, target, edge_skip, -1, -1))
            res.ambiguous.push_back({});
        else
            res.paths.push_back({{}, {}, nff::distance(source, target)});
    } else if (!segment_hits(scene, source, target, -edge_skip, -1, -1)) {
        res.ambiguous.push_back({});
    }

    std::vector<Candidate> cands;
    const int nf = static_cast<int>(planes.size());
    for (int a = 0; a < nf && max_depth >= 1; ++a) {
        cands.push_back({{a}, {&planes[static_cast<std::size_t>(a)]}, {owner(a)}});
        for (int b = 0; b < nf && max_depth >= 2; ++b)
            if (b != a)
                cands.push_back({{a, b},
                                 {&planes[static_cast<std::size_t>(a)], &planes[static_cast<std::size_t>(b)]},
                                 {owner(a), owner(b)}});
    }

    constexpr double kGrow = 1.0; // search beyond the rectangle to tell clamped minima from edge hits
    for (const Candidate &cand : cands) {
        const std::size_t depth = cand.planes.size();
        // Necessary conditions: both endpoints on the lit side of the first and last faces.
        if (side(*cand.planes.front(), source) <= 0.0 || side(*cand.planes.back(), target) <= 0.0)
            continue;
        if (depth == 2) {
            // Some corner of each face must lie strictly in front of the other.
            auto any_front = [](const Plane &of, const Plane &p) {
                for (int i = 0; i < 4; ++i) {
                    const int au = axis_u(of.axis), av = axis_v(of.axis);
                    const double u = (i & 1) ? of.hi[au] : of.lo[au];
                    const double v = (i & 2) ? of.hi[av] : of.lo[av];
                    if (side(p, point_on(of, u, v)) > 1e-9)
                        return true;
                }
                return false;
            };
            if (!any_front(*cand.planes[1], *cand.planes[0]) || !any_front(*cand.planes[0], *cand.planes[1]))
                continue;
        }
        std::vector<double> lo, hi;
        for (const Plane *p : cand.planes) {
            const int au = axis_u(p->axis), av = axis_v(p->axis);
            lo.push_back(p->lo[au] - kGrow);
            hi.push_back(p->hi[au] + kGrow);
            lo.push_back(p->lo[av] - kGrow);
            hi.push_back(p->hi[av] + kGrow);
        }
        const std::vector<double> x = minimize(source, target, cand.planes, lo, hi, resolution);

        bool ambiguous = false, valid = true;
        std::vector<Vec3> pts;
        for (std::size_t i = 0; i < depth; ++i) {
            const double in = inset(*cand.planes[i], x[2 * i], x[2 * i + 1]);
            if (std::abs(in) < edge_skip)
                ambiguous = true;
            else if (in < 0.0)
                valid = false;
            pts.push_back(point_on(*cand.planes[i], x[2 * i], x[2 * i + 1]));
        }
        if (!valid)
            continue;
        std::vector<Vec3> chain{source};
        chain.insert(chain.end(), pts.begin(), pts.end());
        chain.push_back(target);
        for (std::size_t i = 0; i < depth && valid; ++i) {
            const double s_prev = side(*cand.planes[i], chain[i]);
            const double s_next = side(*cand.planes[i], chain[i + 2]);
            if (s_prev <= 1e-6 || s_next <= 1e-6)
                valid = false;
        }
        // A ground bounce under a building footprint lies inside that building.
        for (std::size_t i = 0; i < depth && valid; ++i)
            if (cand.owners[i] < 0)
                for (const auto &bd : scene.buildings) {
                    const double out = std::max({bd.footprint.x0 - pts[i].x, pts[i].x - bd.footprint.x1,
                                                 bd.footprint.y0 - pts[i].y, pts[i].y - bd.footprint.y1});
                    if (out < -edge_skip)
                        valid = false;
                    else if (out <= edge_skip)
                        ambiguous = true;
                }
        if (!valid)
            continue;
        for (std::size_t i = 0; i + 1 < chain.size() && valid; ++i) {
            const int own_a = i == 0 ? -1 : cand.owners[i - 1];
            const int own_b = i + 1 == chain.size() - 1 ? -1 : cand.owners[i];
            const bool hit = segment_hits(scene, chain[i], chain[i + 1], 0.0, own_a, own_b);
            const bool hit_grown = segment_hits(scene, chain[i], chain[i + 1], edge_skip, own_a, own_b);
            const bool hit_shrunk = segment_hits(scene, chain[i], chain[i + 1], -edge_skip, own_a, own_b);
            if (hit_shrunk)
                valid = false;
            else if (hit || hit_grown)
                ambiguous = true;
        }
        if (!valid)
            continue;
        if (ambiguous) {
            res.ambiguous.push_back(cand.faces);
            continue;
        }
        double len = 0.0;
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            len += nff::distance(chain[i], chain[i + 1]);
        res.paths.push_back({cand.faces, pts, len});
    }
    return res;
}

std::complex<double> phasor(double f, double d)
{
    const long double cyc = static_cast<long double>(f) * static_cast<long double>(d) / kC;
    const long double frac = cyc - std::floor(cyc);
    const long double ang = -kTwoPi * frac;
    return {static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang))};
}

std::vector<Vec3> upa_positions(int m_y, int m_z, double f_c, const Vec3 &center)
{
    const double spacing = 0.5 * 299792458.0 / f_c;
    std::vector<Vec3> out;
    for (int iy = 0; iy < m_y; ++iy)
        for (int iz = 0; iz < m_z; ++iz)
            out.push_back({center.x, center.y + (iy - 0.5 * (m_y - 1)) * spacing,
                           center.z + (iz - 0.5 * (m_z - 1)) * spacing});
    return out;
}

double student_t975(double dof)
{
    const double log_norm =
        std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * 3.14159265358979323846);
    auto density = [&](double x) { return std::exp(log_norm - 0.5 * (dof + 1.0) * std::log1p(x * x / dof)); };
    auto cdf_above_half = [&](double x) {
        const int n = 4000;
        const double h = x / n;
        double s = density(0.0) + density(x);
        for (int i = 1; i < n; ++i)
            s += density(i * h) * (i % 2 ? 4.0 : 2.0);
        return s * h / 3.0; // P(0 < T < x)
    };
    double lo = 0.0, hi = 20.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf_above_half(mid) < 0.475 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace oracle
