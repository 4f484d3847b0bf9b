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
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nff/constants.hpp"
#include "nff/errors.hpp"
#include "nff/materials.hpp"

using nff::MaterialKind;
using nff::MaterialTable;

namespace {

nlohmann::json data_file()
{
    std::ifstream in(NFF_SOURCE_DIR "/data/itu_materials.json");
    REQUIRE(in);
    return nlohmann::json::parse(in);
}

} // namespace

TEST_CASE("Built-in table matches the data file", "[materials]")
{
    const auto doc = data_file();
    const auto &table = MaterialTable::builtin();
    CHECK(table.version() == doc.at("table_version").get<int>());
    for (const auto &[name, row] : doc.at("materials").items()) {
        const auto &m = table.by_name(name);
        CHECK(m.permittivity_a == row.at("a").get<double>());
        CHECK(m.permittivity_b == row.at("b").get<double>());
        CHECK(m.conductivity_c == row.at("c").get<double>());
        CHECK(m.conductivity_d == row.at("d").get<double>());
    }
}

TEST_CASE("Material invariants hold over 6 to 24 GHz", "[materials]")
{
    const auto &table = MaterialTable::builtin();
    for (auto kind : {MaterialKind::Concrete, MaterialKind::Marble, MaterialKind::Wood, MaterialKind::Metal,
                      MaterialKind::MediumDryGround}) {
        const auto &m = table.get(kind);
        for (double f = 6e9; f <= 24e9; f += 0.5e9) {
            CHECK(m.relative_permittivity(f) >= 1.0);
            CHECK(m.conductivity(f) >= 0.0);
        }
    }
}

TEST_CASE("Power-law evaluation and complex permittivity", "[materials]")
{
    const auto &ground = MaterialTable::builtin().get(MaterialKind::MediumDryGround);
    const double f = 7e9;
    const double eps = 15.0 * std::pow(7.0, -0.1);
    const double sigma = 0.035 * std::pow(7.0, 1.63);
    CHECK(ground.relative_permittivity(f) == Catch::Approx(eps).epsilon(1e-12));
    CHECK(ground.conductivity(f) == Catch::Approx(sigma).epsilon(1e-12));
    const auto eta = ground.complex_permittivity(f);
    CHECK(eta.real() == Catch::Approx(eps).epsilon(1e-12));
    CHECK(eta.imag() == Catch::Approx(-sigma / (2.0 * nff::kPi * f * nff::kVacuumPermittivity)).epsilon(1e-12));
}

TEST_CASE("Material names round-trip", "[materials]")
{
    for (auto kind : {MaterialKind::Concrete, MaterialKind::Marble, MaterialKind::Wood, MaterialKind::Metal,
                      MaterialKind::MediumDryGround}) {
        CHECK(nff::material_kind_from_string(nff::to_string(kind)) == kind);
        CHECK(MaterialTable::builtin().get(kind).kind == kind);
    }
    CHECK_THROWS_AS(nff::material_kind_from_string("glass"), nff::UnknownMaterial);
    CHECK_THROWS_AS(MaterialTable::builtin().by_name("glass"), nff::UnknownMaterial);
}

TEST_CASE("Malformed tables are rejected", "[materials]")
{
    CHECK_THROWS_AS(MaterialTable::from_json_text("{"), std::invalid_argument);
    CHECK_THROWS_AS(MaterialTable::from_json_text(R"({"table": "x"})"), std::invalid_argument);
    const auto partial = MaterialTable::from_json_text(
        R"({"table": "x", "table_version": 3, "materials": {"wood": {"a": 2, "b": 0, "c": 0.01, "d": 1}}})");
    CHECK(partial.version() == 3);
    CHECK(partial.get(MaterialKind::Wood).permittivity_a == 2.0);
    CHECK_THROWS_AS(partial.get(MaterialKind::Metal), nff::UnknownMaterial);
}
