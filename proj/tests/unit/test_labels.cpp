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

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "nff/channel.hpp"
#include "nff/codebook.hpp"
#include "nff/constants.hpp"
#include "nff/errors.hpp"
#include "nff/labels.hpp"
#include "nff/raytrace.hpp"
#include "nff/rng.hpp"
#include "nff/scene.hpp"
#include "oracles.hpp"

using nff::NearFieldCodebook;
using nff::PolarGrid;
using nff::Vec3;
using cd = std::complex<double>;

namespace {

constexpr double kFc = 7e9;
const Vec3 kO{0, 0, 65};

Eigen::VectorXcd random_vector(nff::Rng &rng, Eigen::Index m)
{
    Eigen::VectorXcd v(m);
    for (Eigen::Index i = 0; i < m; ++i)
        v(i) = {rng.normal(), rng.normal()};
    return v;
}

PolarGrid small_grid()
{
    PolarGrid g;
    g.n_theta = 8;
    g.n_phi = 6;
    g.n_r = 5;
    return g;
}

} // namespace

TEST_CASE("Achievable rate examples", "[labels]")
{
    nff::Rng rng(1);
    const Eigen::VectorXcd h = random_vector(rng, 16);
    Eigen::VectorXcd w = random_vector(rng, 16);
    w -= h * (h.dot(w) / h.squaredNorm()); // now orthogonal to h
    w.normalize();
    CHECK(nff::achievable_rate(w, h, 1.0, 1.0) == Catch::Approx(0.0).margin(1e-12));

    const Eigen::VectorXcd u = h.normalized();
    const double snr1_pr = 1.0 / h.squaredNorm();
    CHECK(nff::achievable_rate(u, h, snr1_pr, 1.0) == Catch::Approx(1.0).epsilon(1e-12));

    const double pr = 1e4 / h.squaredNorm(); // 40 dB
    CHECK(nff::achievable_rate(u, h, 2 * pr, 1.0) - nff::achievable_rate(u, h, pr, 1.0) ==
          Catch::Approx(1.0).margin(0.01));
    CHECK(nff::rate_from_gain(3.0, 1.0, 1.0) == Catch::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("Normalized gain examples", "[labels]")
{
    nff::Rng rng(2);
    const Eigen::VectorXcd h = random_vector(rng, 16);
    const Eigen::VectorXcd opt = h.normalized();
    CHECK(nff::normalized_gain(opt, h, opt) == Catch::Approx(1.0).epsilon(1e-15));
    Eigen::VectorXcd perp = random_vector(rng, 16);
    perp -= h * (h.dot(perp) / h.squaredNorm());
    perp.normalize();
    CHECK(nff::normalized_gain(perp, h, opt) == Catch::Approx(0.0).margin(1e-15));
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(16), e1 = Eigen::VectorXcd::Zero(16);
    e0(0) = 1.0;
    e1(1) = 1.0;
    CHECK_THROWS_AS(nff::normalized_gain(e0, e0, e1), nff::UndefinedReference);

    // Higher normalized gain implies higher rate.
    for (int i = 0; i < 100; ++i) {
        const Eigen::VectorXcd a = random_vector(rng, 16).normalized(), b = random_vector(rng, 16).normalized();
        const double ga = nff::normalized_gain(a, h, opt), gb = nff::normalized_gain(b, h, opt);
        const double ra = nff::achievable_rate(a, h, 1.0, 1.0), rb = nff::achievable_rate(b, h, 1.0, 1.0);
        CHECK((ga > gb) == (ra > rb));
        CHECK(ga <= 1.0 + 1e-12);
    }
}

TEST_CASE("Top-n selection breaks ties by index", "[labels]")
{
    const std::vector<double> v{1.0, 3.0, 3.0, 2.0, 3.0, 0.5};
    const auto top = nff::top_n_indices(v, 4);
    REQUIRE(top.size() == 4);
    CHECK(top == std::vector<std::size_t>{1, 2, 4, 3});
    CHECK(nff::top_n_indices(v, 10).size() == v.size());
    CHECK(nff::top_n_indices({}, 3).empty());
}

TEST_CASE("Labels on an on-grid single-path channel", "[labels]")
{
    const auto array = nff::make_upa(16, 16, kFc, kO);
    const NearFieldCodebook cb(PolarGrid{}, array, kFc);
    for (int k : {1, 777, 2345, 4000}) {
        const Vec3 src = cb.focus(k);
        Eigen::VectorXcd h(256);
        for (int m = 0; m < 256; ++m) {
            const double d = nff::distance(src, array.elements[static_cast<std::size_t>(m)]);
            h(m) = nff::wavelength(kFc) / (4 * nff::kPi * d) * oracle::phasor(kFc, d);
        }
        const auto label = nff::label_beams(h, cb, 1e10, 1.0);
        CHECK(label.top_global[0] == k);
        CHECK(label.top_gains[0] == 1.0);
        CHECK(label.top_tuples[0] == nff::decompose_index(k, cb.grid()));
    }
}

TEST_CASE("Label invariants and exhaustive optimality", "[labels]")
{
    const auto array = nff::make_upa(8, 8, kFc, kO);
    const NearFieldCodebook cb(small_grid(), array, kFc);
    nff::Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::VectorXcd h = random_vector(rng, 64);
        const auto label = nff::label_beams(h, cb, 2.0, 0.5);
        std::set<int> distinct(label.top_global.begin(), label.top_global.end());
        CHECK(distinct.size() == nff::kTopBeams);
        CHECK(label.top_gains[0] == 1.0);
        for (std::size_t i = 0; i < nff::kTopBeams; ++i) {
            CHECK(label.top_global[i] >= 1);
            CHECK(label.top_global[i] <= static_cast<int>(cb.size()));
            CHECK(label.top_tuples[i] == nff::decompose_index(label.top_global[i], cb.grid()));
            if (i > 0)
                CHECK(label.top_gains[i] <= label.top_gains[i - 1]);
        }
        // Brute force over explicit codewords.
        const auto w_opt = cb.codeword(label.top_global[0]);
        double best_rate = 0.0;
        for (int k = 1; k <= static_cast<int>(cb.size()); ++k) {
            const auto w = cb.codeword(k);
            best_rate = std::max(best_rate, nff::achievable_rate(w, h, 2.0, 0.5));
            CHECK(nff::normalized_gain(w, h, w_opt) <= 1.0 + 1e-9);
        }
        CHECK(label.top1_rate == Catch::Approx(best_rate).epsilon(1e-9));
        for (std::size_t i = 1; i < nff::kTopBeams; ++i)
            CHECK(label.top_gains[i] ==
                  Catch::Approx(nff::normalized_gain(cb.codeword(label.top_global[i]), h, w_opt)).epsilon(1e-9));

        // Ranking is invariant to a complex scale of the channel.
        const auto scaled = nff::label_beams(h * cd(-3.5, 0.25), cb, 2.0, 0.5);
        CHECK(scaled.top_global == label.top_global);
    }
}

TEST_CASE("A channel seen by a single codeword", "[labels]")
{
    PolarGrid g;
    g.n_theta = 5;
    g.n_phi = 1;
    g.n_r = 1;
    const auto array = nff::make_upa(8, 8, kFc, kO);
    const NearFieldCodebook cb(g, array, kFc);
    // Project codeword 3 onto the orthogonal complement of the other four.
    Eigen::MatrixXcd others(64, 4);
    for (int k = 1, c = 0; k <= 5; ++k)
        if (k != 3)
            others.col(c++) = cb.codeword(k);
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(others);
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(64, 4);
    const Eigen::VectorXcd w3 = cb.codeword(3);
    const Eigen::VectorXcd h = w3 - q * (q.adjoint() * w3);
    const auto label = nff::label_beams(h, cb, 1.0, 1.0);
    CHECK(label.top_global[0] == 3);
    CHECK(label.top_gains[0] == 1.0);
    for (std::size_t i = 1; i < 5; ++i)
        CHECK(label.top_gains[i] < 1e-20);
}

TEST_CASE("Single-antenna ties resolve to the first indices", "[labels]")
{
    PolarGrid g;
    g.n_theta = 3;
    g.n_phi = 3;
    g.n_r = 2;
    const auto array = nff::make_upa(1, 1, kFc, kO);
    const NearFieldCodebook cb(g, array, kFc);
    Eigen::VectorXcd h(1);
    h(0) = cd(0.6, -0.8);
    const auto label = nff::label_beams(h, cb, 1.0, 1.0);
    CHECK(label.top_global == std::array<int, 5>{1, 2, 3, 4, 5});
    for (double gain : label.top_gains)
        CHECK(gain == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Degenerate channels are flagged", "[labels]")
{
    const auto array = nff::make_upa(4, 4, kFc, kO);
    const NearFieldCodebook cb(small_grid(), array, kFc);
    CHECK_THROWS_AS(nff::label_beams(Eigen::VectorXcd::Zero(16), cb, 1.0, 1.0), nff::DegenerateChannel);
}

TEST_CASE("LoS indicator rules", "[labels]")
{
    nff::Path los, refl;
    los.is_los = true;
    refl.interaction_points = {{1, 2, 0}};
    nff::PathSet only_refl;
    only_refl.per_antenna = {{refl}, {refl, refl}};
    CHECK_FALSE(nff::los_indicator(only_refl));
    nff::PathSet all_los;
    all_los.per_antenna = {{los}, {los, refl}};
    CHECK(nff::los_indicator(all_los));
    CHECK(nff::los_indicator(all_los, nff::LosRule::ReferenceAntenna, 1));
    CHECK_THROWS_AS(nff::los_indicator(all_los, nff::LosRule::ReferenceAntenna, 2), nff::IndexError);
}

TEST_CASE("Partial aperture blockage keeps the any-antenna LoS label", "[labels]")
{
    const auto array = nff::make_upa(16, 16, kFc, kO);
    const Vec3 target{60, 0, 40};
    // The far roof edge at x = 30 cuts the aperture: the ray from height z crosses it at z / 2 + 20.
    const double z_lo = array.elements.front().z, z_hi = array.elements.back().z;
    const double edge = 0.5 * ((z_lo / 2 + 20) + (z_hi / 2 + 20));
    nff::Scene s = nff::make_empty_scene(false);
    s.buildings.push_back({{20, 30, -10, 10}, edge, nff::MaterialTable::builtin().get(nff::MaterialKind::Wood)});
    nff::TraceOptions opt;
    opt.max_depth = 0;
    const auto ps = nff::trace_paths(s, array, target, kFc, opt);
    std::size_t lit = 0;
    for (const auto &list : ps.per_antenna)
        lit += list.empty() ? 0 : 1;
    CHECK(lit > 0);
    CHECK(lit < array.size());
    CHECK(nff::los_indicator(ps));
    const std::size_t low = 0; // bottom row element is blocked
    CHECK_FALSE(nff::los_indicator(ps, nff::LosRule::ReferenceAntenna, low));
}

TEST_CASE("Reference-antenna LoS label matches geometric visibility", "[labels]")
{
    const auto array = nff::make_upa(4, 4, kFc, kO);
    nff::Rng rng(5);
    int los = 0, nlos = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const nff::Scene s = nff::generate_scene(seed);
        for (int i = 0; i < 10; ++i) {
            Vec3 u;
            do
                u = {rng.uniform(1, 119), rng.uniform(-59, 59), rng.uniform(2, 60)};
            while (s.building_containing(u, 0.5) >= 0);
            nff::TraceOptions opt;
            opt.max_depth = 0;
            const auto ps = nff::trace_paths(s, array, u, kFc, opt);
            const std::size_t ref = array.reference_index();
            const bool label = nff::los_indicator(ps, nff::LosRule::ReferenceAntenna, ref);
            CHECK(label == !nff::los_blocked(s, array.elements[ref], u));
            (label ? los : nlos) += 1;
        }
    }
    CHECK(los > 0);
    CHECK(nlos > 0);
}

TEST_CASE("GPS observation noise", "[labels]")
{
    const Vec3 u{10, -20, 30};
    CHECK(nff::gps_observe(u, 0.0, 4).u_tilde == u);
    CHECK(nff::gps_observe(u, 0.5, 4).u_tilde == nff::gps_observe(u, 0.5, 4).u_tilde);
    CHECK_FALSE(nff::gps_observe(u, 0.5, 4).u_tilde == nff::gps_observe(u, 0.5, 5).u_tilde);
    CHECK(nff::kDefaultGpsVariance == 0.5);

    const double s2 = nff::kDefaultGpsVariance;
    const int n = 100000;
    double var[3] = {0, 0, 0}, mean_norm = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec3 z = nff::gps_observe(u, s2, static_cast<std::uint64_t>(i)).u_tilde - u;
        for (int a = 0; a < 3; ++a)
            var[a] += z[a] * z[a] / n;
        mean_norm += nff::norm(z) / n;
    }
    for (double v : var)
        CHECK(std::abs(v - s2) < 0.03 * s2);
    // Chi distribution with 3 degrees of freedom.
    const double expect = std::sqrt(s2) * std::sqrt(2.0) * std::tgamma(2.0) / std::tgamma(1.5);
    CHECK(std::abs(mean_norm - expect) < 0.03 * expect);
    CHECK_THROWS_AS(nff::gps_observe(u, -1.0, 1), std::invalid_argument);
}
