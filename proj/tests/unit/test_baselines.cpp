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

#include <cmath>
#include <set>

#include "nff/baselines.hpp"
#include "nff/codebook.hpp"
#include "nff/constants.hpp"
#include "nff/errors.hpp"
#include "nff/labels.hpp"
#include "nff/raytrace.hpp"
#include "nff/rng.hpp"
#include "oracles.hpp"

using nff::FarFieldCodebook;
using nff::NearFieldCodebook;
using nff::PolarGrid;
using nff::PolarTuple;
using nff::Strategy;
using nff::Vec3;

namespace {

constexpr double kFc = 7e9;
const Vec3 kO{0, 0, 65};

PolarGrid small_grid()
{
    PolarGrid g;
    g.n_theta = 9;
    g.n_phi = 7;
    g.n_r = 6;
    return g;
}

/// Spherical-wave LoS channel from `src` to every element (unit amplitude).
Eigen::VectorXcd point_source(const std::vector<Vec3> &elems, const Vec3 &src, double amp = 1.0)
{
    Eigen::VectorXcd h(static_cast<Eigen::Index>(elems.size()));
    for (std::size_t m = 0; m < elems.size(); ++m)
        h(static_cast<Eigen::Index>(m)) = amp * oracle::phasor(kFc, nff::distance(elems[m], src));
    return h;
}

Vec3 polar_point(double theta, double phi, double d)
{
    return kO + Vec3{d * std::sin(phi) * std::cos(theta), d * std::sin(phi) * std::sin(theta), d * std::cos(phi)};
}

} // namespace

TEST_CASE("OMP localizes an on-grid point source exactly", "[baselines]")
{
    const auto arr = nff::make_upa(16, 16, kFc, kO);
    const auto elems = oracle::upa_positions(16, 16, kFc, kO);
    const PolarGrid g = small_grid();
    const NearFieldCodebook dict(g, arr, kFc);
    for (const PolarTuple t : {PolarTuple{5, 4, 1}, PolarTuple{2, 6, 3}, PolarTuple{8, 2, 2}}) {
        const Vec3 src = polar_point(g.theta(t.k_theta), g.phi(t.k_phi), g.dist(t.k_r));
        const auto res = nff::omp_localize(point_source(elems, src), dict, src);
        CHECK(res.atoms == std::vector<int>{nff::global_index(t, g)});
        CHECK(res.tuple.k_theta == t.k_theta);
        CHECK(res.tuple.k_phi == t.k_phi);
        CHECK(res.tuple.k_r == t.k_r);
        CHECK(res.err_3d < 1e-9);
        CHECK(res.err_dist < 1e-9);
        CHECK(res.err_az < 1e-9);
        CHECK(res.err_zen < 1e-9);
    }
}

TEST_CASE("OMP with two iterations recovers two separated sources", "[baselines]")
{
    const auto arr = nff::make_upa(16, 16, kFc, kO);
    const auto elems = oracle::upa_positions(16, 16, kFc, kO);
    const PolarGrid g = small_grid();
    const NearFieldCodebook dict(g, arr, kFc);
    const PolarTuple a{2, 3, 2}, b{8, 5, 5};
    const Vec3 pa = polar_point(g.theta(a.k_theta), g.phi(a.k_phi), g.dist(a.k_r));
    const Vec3 pb = polar_point(g.theta(b.k_theta), g.phi(b.k_phi), g.dist(b.k_r));
    const Eigen::VectorXcd h = point_source(elems, pa) + point_source(elems, pb, 0.5);
    const auto res = nff::omp_localize(h, dict, pa, 2);
    REQUIRE(res.atoms.size() == 2);
    CHECK(res.atoms[0] == nff::global_index(a, g));
    CHECK(res.atoms[1] == nff::global_index(b, g));
    CHECK(res.err_3d < 1e-9);
}

TEST_CASE("OMP rejects degenerate input", "[baselines]")
{
    const auto arr = nff::make_upa(4, 4, kFc, kO);
    const NearFieldCodebook dict(small_grid(), arr, kFc);
    CHECK_THROWS_AS(nff::omp_localize(Eigen::VectorXcd::Zero(16), dict, kO), nff::DegenerateChannel);
    CHECK_THROWS_AS(nff::omp_localize(Eigen::VectorXcd::Ones(16), dict, kO, 0), std::invalid_argument);
}

TEST_CASE("Worst cell diagonal bounds the distance to the nearest focus point", "[baselines]")
{
    const PolarGrid g = small_grid();
    // Brute force over cell corners with the polar formula written out here.
    double worst = 0.0;
    for (int i = 1; i < g.n_theta; ++i)
        for (int j = 1; j < g.n_phi; ++j)
            for (int k = 1; k < g.n_r; ++k) {
                std::vector<Vec3> c;
                for (int m = 0; m < 8; ++m)
                    c.push_back(polar_point(g.theta(i + (m & 1)), g.phi(j + ((m >> 1) & 1)), g.dist(k + ((m >> 2) & 1))));
                for (const auto &p : c)
                    for (const auto &q : c)
                        worst = std::max(worst, nff::distance(p, q));
            }
    const double diag = nff::worst_cell_diagonal(g, kO);
    CHECK(diag == Catch::Approx(worst).epsilon(1e-12));

    nff::Rng rng(5);
    for (int n = 0; n < 500; ++n) {
        const double th = nff::deg2rad(rng.uniform(g.theta_min_deg, g.theta_max_deg));
        const double ph = nff::deg2rad(rng.uniform(g.phi_min_deg, g.phi_max_deg));
        const Vec3 p = polar_point(th, ph, rng.uniform(g.d_min, g.d_max));
        REQUIRE(nff::within_coverage(g, kO, p));
        double nearest = 1e300;
        for (int k = 1; k <= static_cast<int>(g.size()); ++k)
            nearest = std::min(nearest, nff::distance(p, nff::focus_point(nff::decompose_index(k, g), g, kO)));
        CHECK(nearest <= diag);
    }
}

TEST_CASE("Coverage test follows the polar box", "[baselines]")
{
    const PolarGrid g = small_grid();
    const double th0 = nff::deg2rad(g.theta_min_deg), ph0 = nff::deg2rad(g.phi_min_deg);
    CHECK(nff::within_coverage(g, kO, polar_point(0.0, nff::deg2rad(100.0), 80.0)));
    CHECK(nff::within_coverage(g, kO, polar_point(th0 + 1e-9, ph0 + 1e-9, g.d_min + 1e-9)));
    CHECK_FALSE(nff::within_coverage(g, kO, polar_point(0.0, nff::deg2rad(100.0), g.d_max + 0.1)));
    CHECK_FALSE(nff::within_coverage(g, kO, polar_point(0.0, nff::deg2rad(100.0), g.d_min - 0.1)));
    CHECK_FALSE(nff::within_coverage(g, kO, polar_point(th0 - 0.01, nff::deg2rad(100.0), 80.0)));
    CHECK_FALSE(nff::within_coverage(g, kO, polar_point(0.0, nff::deg2rad(g.phi_max_deg) + 0.01, 80.0)));
}

TEST_CASE("Strategy names round-trip", "[baselines]")
{
    for (Strategy s : {Strategy::Exhaustive, Strategy::FarField, Strategy::TwoStageNearField,
                       Strategy::ExternalPrediction})
        CHECK(nff::strategy_from_string(nff::to_string(s)) == s);
    CHECK(nff::to_string(Strategy::TwoStageNearField) == "two_stage");
    CHECK_THROWS_AS(nff::strategy_from_string("oracle"), std::invalid_argument);
}

TEST_CASE("Beam training sweeps and gains", "[baselines]")
{
    const auto arr = nff::make_upa(16, 16, kFc, kO);
    const auto elems = oracle::upa_positions(16, 16, kFc, kO);
    const PolarGrid g = small_grid();
    const NearFieldCodebook near(g, arr, kFc);
    const FarFieldCodebook far(g, arr, kFc);
    const std::vector<Strategy> all{Strategy::Exhaustive, Strategy::FarField, Strategy::TwoStageNearField};
    const double p_r = 2.0, sigma2 = 0.5;

    const PolarTuple t{4, 3, 2};
    const Vec3 src = polar_point(g.theta(t.k_theta), g.phi(t.k_phi), g.dist(t.k_r));
    const Eigen::VectorXcd h = point_source(elems, src);
    const auto res = nff::beam_train(h, near, far, all, p_r, sigma2);
    REQUIRE(res.size() == 3);
    CHECK(res[0].chosen_index == nff::global_index(t, g));
    CHECK(res[0].sweeps == g.size());
    CHECK(res[0].norm_gain == 1.0);
    CHECK(res[0].gain == Catch::Approx(256.0).epsilon(1e-9));
    CHECK(res[1].sweeps == g.angle_count());
    CHECK(res[2].sweeps == g.angle_count() + static_cast<std::size_t>(g.n_r));
    CHECK(res[2].norm_gain <= 1.0);
    for (const auto &r : res)
        CHECK(r.rate == Catch::Approx(std::log2(1.0 + p_r * r.gain / sigma2)).epsilon(1e-12));

    // Reported gains equal explicit codeword projections.
    CHECK(std::norm(near.codeword(res[2].chosen_index).dot(h)) == Catch::Approx(res[2].gain).epsilon(1e-9));
    CHECK(std::norm(far.codeword(res[1].chosen_index).dot(h)) == Catch::Approx(res[1].gain).epsilon(1e-9));

    const auto single = nff::beam_train(h, near, far, Strategy::FarField, p_r, sigma2);
    CHECK(single.chosen_index == res[1].chosen_index);
    CHECK(single.gain == res[1].gain);
}

TEST_CASE("Two-stage training matches exhaustive in the far field", "[baselines]")
{
    // Beyond the 16x16 Rayleigh distance the angular stage finds the right angle pair.
    const auto arr = nff::make_upa(16, 16, kFc, kO);
    const auto elems = oracle::upa_positions(16, 16, kFc, kO);
    PolarGrid g = small_grid();
    g.d_min = 30.0;
    g.d_max = 60.0;
    const NearFieldCodebook near(g, arr, kFc);
    const FarFieldCodebook far(g, arr, kFc);
    for (int kt = 1; kt <= g.n_theta; kt += 2)
        for (int kp = 1; kp <= g.n_phi; kp += 2) {
            const PolarTuple t{kt, kp, 3};
            const Vec3 src = polar_point(g.theta(kt), g.phi(kp), g.dist(3));
            const auto r = nff::beam_train(point_source(elems, src), near, far,
                                           {Strategy::Exhaustive, Strategy::TwoStageNearField}, 1.0, 1.0);
            CHECK(r[1].chosen_index == nff::global_index(t, g));
            CHECK(r[1].norm_gain == Catch::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("Beam training rejects invalid input", "[baselines]")
{
    const auto arr = nff::make_upa(4, 4, kFc, kO);
    const PolarGrid g = small_grid();
    PolarGrid other = g;
    other.n_phi = 5;
    const NearFieldCodebook near(g, arr, kFc);
    const FarFieldCodebook far(g, arr, kFc), far_other(other, arr, kFc);
    const Eigen::VectorXcd h = Eigen::VectorXcd::Ones(16);
    CHECK_THROWS_AS(nff::beam_train(Eigen::VectorXcd::Zero(16), near, far, Strategy::Exhaustive, 1, 1),
                    nff::DegenerateChannel);
    CHECK_THROWS_AS(nff::beam_train(h, near, far_other, Strategy::Exhaustive, 1, 1), nff::ShapeMismatch);
    CHECK_THROWS_AS(nff::beam_train(h, near, far, Strategy::ExternalPrediction, 1, 1), std::invalid_argument);
}

TEST_CASE("Paired interval uses the Student t quantile", "[baselines]")
{
    const std::vector<double> d{0.12, -0.03, 0.08, 0.2, 0.05, 0.01, 0.15};
    const auto pi = nff::paired_interval(d);
    double mean = 0.0, ss = 0.0;
    for (double x : d)
        mean += x / static_cast<double>(d.size());
    for (double x : d)
        ss += (x - mean) * (x - mean);
    const double half = oracle::student_t975(6.0) * std::sqrt(ss / 6.0 / 7.0);
    CHECK(pi.n == 7);
    CHECK(pi.mean == Catch::Approx(mean).epsilon(1e-12));
    CHECK(pi.lower == Catch::Approx(mean - half).epsilon(1e-9));
    CHECK(pi.upper == Catch::Approx(mean + half).epsilon(1e-9));

    for (int dof : {1, 2, 5, 29, 30, 31, 200}) {
        std::vector<double> two(static_cast<std::size_t>(dof) + 1, 0.0);
        two[0] = 1.0;
        const auto p = nff::paired_interval(two);
        const double m = 1.0 / (dof + 1.0);
        const double s = std::sqrt(((1.0 - m) * (1.0 - m) + dof * m * m) / dof / (dof + 1.0));
        CHECK((p.upper - p.mean) / s == Catch::Approx(oracle::student_t975(dof)).epsilon(1e-6));
    }

    const auto one = nff::paired_interval({0.4});
    CHECK(one.mean == 0.4);
    CHECK(std::isinf(one.lower));
    CHECK(std::isinf(one.upper));
    CHECK(nff::paired_interval({}).n == 0);
}

TEST_CASE("Dataset evaluation aggregates cells", "[baselines]")
{
    const auto arr = nff::make_upa(8, 8, kFc, kO);
    const auto elems = oracle::upa_positions(8, 8, kFc, kO);
    const PolarGrid g = small_grid();
    const NearFieldCodebook near(g, arr, kFc);
    const FarFieldCodebook far(g, arr, kFc);
    nff::Rng rng(9);
    std::vector<nff::EvalFrame> frames;
    for (int i = 0; i < 12; ++i) {
        nff::EvalFrame f;
        const Vec3 src = polar_point(rng.uniform(-1.0, 1.0), rng.uniform(1.2, 2.4), rng.uniform(25.0, 140.0));
        f.h = point_source(elems, src);
        f.los = i % 3 != 0;
        f.difficulty = nff::Difficulty::Easy;
        frames.push_back(f);
    }
    const std::vector<Strategy> strat{Strategy::Exhaustive, Strategy::FarField, Strategy::TwoStageNearField};
    const auto rep = nff::evaluate_dataset(frames, near, far, strat, 1.0, 1.0);

    REQUIRE(rep.cells.at("all").at(Strategy::FarField));
    CHECK(rep.cells.at("all").at(Strategy::FarField)->frames == 12);
    CHECK(rep.cells.at("los").at(Strategy::FarField)->frames == 8);
    CHECK(rep.cells.at("nlos").at(Strategy::FarField)->frames == 4);
    CHECK(rep.cells.at("easy").at(Strategy::FarField)->frames == 12);
    CHECK_FALSE(rep.cells.at("hard").at(Strategy::FarField).has_value());
    CHECK(rep.cells.at("all").at(Strategy::Exhaustive)->mean_norm_gain == 1.0);

    for (Strategy s : strat) {
        const auto &per = rep.per_frame_norm_gain.at(s);
        REQUIRE(per.size() == 12);
        double mean = 0.0, los_rate = 0.0;
        for (std::size_t i = 0; i < 12; ++i) {
            const auto r = nff::beam_train(frames[i].h, near, far, s, 1.0, 1.0);
            CHECK(per[i] == r.norm_gain);
            mean += per[i] / 12.0;
            los_rate += frames[i].los ? r.rate / 8.0 : 0.0;
        }
        CHECK(rep.cells.at("all").at(s)->mean_norm_gain == Catch::Approx(mean).epsilon(1e-12));
        CHECK(rep.cells.at("los").at(s)->mean_rate == Catch::Approx(los_rate).epsilon(1e-12));
    }

    REQUIRE(rep.two_stage_minus_far_field);
    CHECK(rep.two_stage_minus_far_field->n == 12);
    CHECK(rep.two_stage_minus_far_field->mean ==
          Catch::Approx(rep.cells.at("all").at(Strategy::TwoStageNearField)->mean_norm_gain -
                        rep.cells.at("all").at(Strategy::FarField)->mean_norm_gain)
              .margin(1e-12));

    const auto j = rep.to_json();
    CHECK(j.at("cells").at("hard").at("far_field").is_null());
    CHECK(j.at("cells").at("los").at("two_stage").at("frames") == 8);
    CHECK(j.contains("two_stage_minus_far_field_norm_gain"));
    const std::string csv = rep.to_csv();
    CHECK(csv.rfind("cell,strategy,frames,mean_norm_gain,mean_rate\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 * 3);
    CHECK(csv.find("hard,far_field,0,,\n") != std::string::npos);
}

TEST_CASE("External predictions score against the labeled optimum", "[baselines]")
{
    const auto arr = nff::make_upa(8, 8, kFc, kO);
    const auto elems = oracle::upa_positions(8, 8, kFc, kO);
    const PolarGrid g = small_grid();
    const NearFieldCodebook near(g, arr, kFc);
    std::vector<nff::EvalFrame> frames(3);
    const PolarTuple t{3, 4, 2};
    for (auto &f : frames) {
        f.h = point_source(elems, polar_point(g.theta(3), g.phi(4), g.dist(2)));
        f.top1_global = nff::global_index(t, g);
    }
    frames[2].top1_global = 0;
    const std::vector<PolarTuple> pred{t, PolarTuple{3, 4, g.n_r + 1}, t};
    const auto score = nff::score_external_prediction(pred, frames, near);
    REQUIRE(score.per_frame.size() == 3);
    CHECK(score.per_frame[0] == 1.0);
    CHECK(score.per_frame[1] == 0.0);
    CHECK(score.per_frame[2] == 0.0);
    REQUIRE(score.violations.size() == 2);
    CHECK(score.violations[0].frame == 1);
    CHECK(score.violations[1].frame == 2);
    CHECK(score.mean_norm_gain == Catch::Approx(1.0 / 3.0));

    const PolarTuple other{5, 4, 2};
    const auto s2 = nff::score_external_prediction({other}, {frames[0]}, near);
    const double expect = std::norm(near.codeword(nff::global_index(other, g)).dot(frames[0].h)) /
                          std::norm(near.codeword(frames[0].top1_global).dot(frames[0].h));
    CHECK(s2.per_frame[0] == Catch::Approx(expect).epsilon(1e-9));
    CHECK(s2.violations.empty());

    CHECK_THROWS_AS(nff::score_external_prediction({t}, frames, near), nff::ShapeMismatch);
}
