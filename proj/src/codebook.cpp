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

#include "nff/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nff/constants.hpp"
#include "nff/errors.hpp"

namespace nff {

namespace {

double linspace_at(double lo, double hi, int n, int k)
{
    if (n == 1)
        return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(k - 1) / static_cast<double>(n - 1);
}

void check_component(int v, int n, const char *name)
{
    if (v < 1 || v > n)
        throw IndexError(std::string("polar index component ") + name + "=" + std::to_string(v) + " outside [1, " +
                         std::to_string(n) + "]");
}

std::vector<double> split_re(const Eigen::VectorXcd &h)
{
    std::vector<double> r(static_cast<std::size_t>(h.size()));
    for (Eigen::Index i = 0; i < h.size(); ++i)
        r[static_cast<std::size_t>(i)] = h(i).real();
    return r;
}

std::vector<double> split_im(const Eigen::VectorXcd &h)
{
    std::vector<double> r(static_cast<std::size_t>(h.size()));
    for (Eigen::Index i = 0; i < h.size(); ++i)
        r[static_cast<std::size_t>(i)] = h(i).imag();
    return r;
}

void check_length(const Eigen::VectorXcd &h, std::size_t m)
{
    if (static_cast<std::size_t>(h.size()) != m)
        throw ShapeMismatch("codebook: channel length " + std::to_string(h.size()) + " != array size " +
                            std::to_string(m));
}

} // namespace

double PolarGrid::theta(int k_theta) const
{
    check_component(k_theta, n_theta, "k_theta");
    return deg2rad(linspace_at(theta_min_deg, theta_max_deg, n_theta, k_theta));
}

double PolarGrid::phi(int k_phi) const
{
    check_component(k_phi, n_phi, "k_phi");
    return deg2rad(linspace_at(phi_min_deg, phi_max_deg, n_phi, k_phi));
}

double PolarGrid::dist(int k_r) const
{
    check_component(k_r, n_r, "k_r");
    if (inverse_distance)
        return 1.0 / linspace_at(1.0 / d_min, 1.0 / d_max, n_r, k_r);
    return linspace_at(d_min, d_max, n_r, k_r);
}

std::vector<double> PolarGrid::distances() const
{
    std::vector<double> d(static_cast<std::size_t>(n_r));
    for (int k = 1; k <= n_r; ++k)
        d[static_cast<std::size_t>(k - 1)] = dist(k);
    return d;
}

void PolarGrid::validate() const
{
    if (n_theta < 1 || n_phi < 1 || n_r < 1)
        throw std::invalid_argument("PolarGrid: sample counts must be >= 1");
    if (!(theta_min_deg <= theta_max_deg) || !(phi_min_deg <= phi_max_deg) || !(d_min <= d_max))
        throw std::invalid_argument("PolarGrid: interval bounds out of order");
    if (!(d_min > 0.0))
        throw std::invalid_argument("PolarGrid: distances must be positive");
    if (phi_min_deg < 0.0 || phi_max_deg > 180.0)
        throw std::invalid_argument("PolarGrid: zenith must lie in [0, 180] degrees");
}

PolarGrid localization_grid()
{
    PolarGrid g;
    g.n_theta = 70;
    g.n_phi = 60;
    g.n_r = 60;
    return g;
}

int global_index(const PolarTuple &t, const PolarGrid &grid)
{
    check_component(t.k_theta, grid.n_theta, "k_theta");
    check_component(t.k_phi, grid.n_phi, "k_phi");
    check_component(t.k_r, grid.n_r, "k_r");
    return (t.k_theta - 1) * grid.n_phi * grid.n_r + (t.k_phi - 1) * grid.n_r + t.k_r;
}

PolarTuple decompose_index(int k, const PolarGrid &grid)
{
    const long long n = static_cast<long long>(grid.size());
    if (k < 1 || k > n)
        throw IndexError("global index " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    const int z = k - 1;
    PolarTuple t;
    t.k_r = z % grid.n_r + 1;
    t.k_phi = (z / grid.n_r) % grid.n_phi + 1;
    t.k_theta = z / (grid.n_r * grid.n_phi) + 1;
    return t;
}

Vec3 polar_direction(double theta, double phi)
{
    return {std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi)};
}

Vec3 polar_to_cartesian(double theta, double phi, double d, const Vec3 &origin)
{
    if (!(d > 0.0))
        throw std::invalid_argument("polar_to_cartesian: distance must be positive");
    return origin + polar_direction(theta, phi) * d;
}

PolarCoords cartesian_to_polar(const Vec3 &p, const Vec3 &origin)
{
    const Vec3 r = p - origin;
    PolarCoords c;
    c.d = norm(r);
    if (c.d == 0.0)
        return c;
    c.phi = std::acos(std::clamp(r.z / c.d, -1.0, 1.0));
    c.theta = std::atan2(r.y, r.x);
    return c;
}

Vec3 focus_point(const PolarTuple &t, const PolarGrid &grid, const Vec3 &origin)
{
    return polar_to_cartesian(grid.theta(t.k_theta), grid.phi(t.k_phi), grid.dist(t.k_r), origin);
}

Eigen::VectorXcd near_field_codeword(const Vec3 &focus, const ArrayGeometry &array, double f_c)
{
    const auto m = static_cast<Eigen::Index>(array.size());
    if (m == 0)
        throw std::invalid_argument("near_field_codeword: empty array");
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    Eigen::VectorXcd w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double d = distance(focus, array.elements[static_cast<std::size_t>(i)]);
        if (d == 0.0)
            throw std::invalid_argument("near_field_codeword: focus coincides with an element");
        double cyc = f_c * d / kSpeedOfLight;
        cyc -= std::nearbyint(cyc);
        w(i) = std::polar(scale, -2.0 * kPi * cyc);
    }
    return w;
}

Eigen::VectorXcd far_field_codeword(double theta, double phi, const ArrayGeometry &array, double f_c,
                                    const Vec3 &origin)
{
    const auto m = static_cast<Eigen::Index>(array.size());
    if (m == 0)
        throw std::invalid_argument("far_field_codeword: empty array");
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    const Vec3 u = polar_direction(theta, phi);
    Eigen::VectorXcd w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double cyc = f_c * dot(u, array.elements[static_cast<std::size_t>(i)] - origin) / kSpeedOfLight;
        cyc -= std::nearbyint(cyc);
        w(i) = std::polar(scale, 2.0 * kPi * cyc);
    }
    return w;
}

NearFieldCodebook::NearFieldCodebook(const PolarGrid &grid, const ArrayGeometry &array, double f_c)
    : NearFieldCodebook(grid, array, f_c, array.center)
{
}

NearFieldCodebook::NearFieldCodebook(const PolarGrid &grid, const ArrayGeometry &array, double f_c,
                                     const Vec3 &origin)
    : grid_(grid), array_(array), f_c_(f_c), origin_(origin)
{
    grid_.validate();
    if (array_.size() == 0)
        throw std::invalid_argument("NearFieldCodebook: empty array");
    if (!(f_c > 0.0))
        throw std::invalid_argument("NearFieldCodebook: carrier must be positive");
    table_ = detail::element_table(array_, origin_);
    dists_ = grid_.distances();
}

Vec3 NearFieldCodebook::focus(int k) const { return focus_point(decompose_index(k, grid_), grid_, origin_); }

Eigen::VectorXcd NearFieldCodebook::codeword(int k) const { return near_field_codeword(focus(k), array_, f_c_); }

std::vector<std::complex<double>> NearFieldCodebook::correlations(const Eigen::VectorXcd &h) const
{
    check_length(h, array_.size());
    const std::vector<double> re = split_re(h), im = split_im(h);
    const double inv_lambda = f_c_ / kSpeedOfLight;
    std::vector<std::complex<double>> out(grid_.size());
    std::size_t base = 0;
    for (int kt = 1; kt <= grid_.n_theta; ++kt) {
        const double th = grid_.theta(kt);
        for (int kp = 1; kp <= grid_.n_phi; ++kp) {
            const Vec3 u = polar_direction(th, grid_.phi(kp));
            detail::spherical_correlations(table_, re.data(), im.data(), u, dists_.data(), dists_.size(), inv_lambda,
                                           out.data() + base);
            base += dists_.size();
        }
    }
    return out;
}

std::vector<double> NearFieldCodebook::gains(const Eigen::VectorXcd &h) const
{
    const auto c = correlations(h);
    std::vector<double> g(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        g[i] = std::norm(c[i]);
    return g;
}

std::complex<double> NearFieldCodebook::correlation(int k, const Eigen::VectorXcd &h) const
{
    check_length(h, array_.size());
    const PolarTuple t = decompose_index(k, grid_);
    const std::vector<double> re = split_re(h), im = split_im(h);
    const Vec3 u = polar_direction(grid_.theta(t.k_theta), grid_.phi(t.k_phi));
    const double d = dists_[static_cast<std::size_t>(t.k_r - 1)];
    std::complex<double> c;
    detail::spherical_correlations(table_, re.data(), im.data(), u, &d, 1, f_c_ / kSpeedOfLight, &c);
    return c;
}

std::vector<double> NearFieldCodebook::ring_gains(int k_theta, int k_phi, const Eigen::VectorXcd &h) const
{
    check_length(h, array_.size());
    const std::vector<double> re = split_re(h), im = split_im(h);
    const Vec3 u = polar_direction(grid_.theta(k_theta), grid_.phi(k_phi));
    std::vector<std::complex<double>> c(dists_.size());
    detail::spherical_correlations(table_, re.data(), im.data(), u, dists_.data(), dists_.size(), f_c_ / kSpeedOfLight,
                                   c.data());
    std::vector<double> g(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        g[i] = std::norm(c[i]);
    return g;
}

nlohmann::json NearFieldCodebook::describe() const
{
    nlohmann::json j = to_json(grid_);
    j["f_c_hz"] = f_c_;
    j["m_y"] = array_.m_y;
    j["m_z"] = array_.m_z;
    j["size"] = size();
    j["index_order"] = "k = (k_theta-1)*N_phi*N_r + (k_phi-1)*N_r + k_r";
    return j;
}

FarFieldCodebook::FarFieldCodebook(const PolarGrid &grid, const ArrayGeometry &array, double f_c)
    : grid_(grid), array_(array), f_c_(f_c)
{
    grid_.validate();
    if (array_.size() == 0)
        throw std::invalid_argument("FarFieldCodebook: empty array");
    table_ = detail::element_table(array_, array_.center);
}

int FarFieldCodebook::angle_index(int k_theta, int k_phi) const
{
    check_component(k_theta, grid_.n_theta, "k_theta");
    check_component(k_phi, grid_.n_phi, "k_phi");
    return (k_theta - 1) * grid_.n_phi + k_phi;
}

std::pair<int, int> FarFieldCodebook::angles_of(int a) const
{
    if (a < 1 || a > static_cast<int>(size()))
        throw IndexError("far-field index " + std::to_string(a) + " out of range");
    return {(a - 1) / grid_.n_phi + 1, (a - 1) % grid_.n_phi + 1};
}

Eigen::VectorXcd FarFieldCodebook::codeword(int a) const
{
    const auto [kt, kp] = angles_of(a);
    return far_field_codeword(grid_.theta(kt), grid_.phi(kp), array_, f_c_, array_.center);
}

std::vector<double> FarFieldCodebook::gains(const Eigen::VectorXcd &h) const
{
    check_length(h, array_.size());
    const std::vector<double> re = split_re(h), im = split_im(h);
    const double inv_lambda = f_c_ / kSpeedOfLight;
    std::vector<double> g;
    g.reserve(size());
    for (int kt = 1; kt <= grid_.n_theta; ++kt)
        for (int kp = 1; kp <= grid_.n_phi; ++kp)
            g.push_back(std::norm(detail::planar_correlation(table_, re.data(), im.data(),
                                                             polar_direction(grid_.theta(kt), grid_.phi(kp)),
                                                             inv_lambda)));
    return g;
}

nlohmann::json to_json(const PolarGrid &g)
{
    return {{"n_theta", g.n_theta},
            {"n_phi", g.n_phi},
            {"n_r", g.n_r},
            {"theta_deg", {g.theta_min_deg, g.theta_max_deg}},
            {"phi_deg", {g.phi_min_deg, g.phi_max_deg}},
            {"dist_m", {g.d_min, g.d_max}},
            {"endpoints", "inclusive"},
            {"distance_sampling", g.inverse_distance ? "inverse" : "uniform"}};
}

PolarGrid polar_grid_from_json(const nlohmann::json &j)
{
    PolarGrid g;
    g.n_theta = j.at("n_theta").get<int>();
    g.n_phi = j.at("n_phi").get<int>();
    g.n_r = j.at("n_r").get<int>();
    g.theta_min_deg = j.at("theta_deg").at(0).get<double>();
    g.theta_max_deg = j.at("theta_deg").at(1).get<double>();
    g.phi_min_deg = j.at("phi_deg").at(0).get<double>();
    g.phi_max_deg = j.at("phi_deg").at(1).get<double>();
    g.d_min = j.at("dist_m").at(0).get<double>();
    g.d_max = j.at("dist_m").at(1).get<double>();
    g.inverse_distance = j.value("distance_sampling", std::string("uniform")) == "inverse";
    g.validate();
    return g;
}

} // namespace nff
