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

#include "nff/materials.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "nff/constants.hpp"
#include "nff/errors.hpp"

namespace nff {

namespace detail {
extern const char *const kMaterialsJson;
}

namespace {

struct KindName {
    MaterialKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {MaterialKind::Concrete, "concrete"},
    {MaterialKind::Marble, "marble"},
    {MaterialKind::Wood, "wood"},
    {MaterialKind::Metal, "metal"},
    {MaterialKind::MediumDryGround, "medium_dry_ground"},
    {MaterialKind::Custom, "custom"},
};

} // namespace

std::string_view to_string(MaterialKind kind)
{
    for (const auto &kn : kKindNames)
        if (kn.kind == kind)
            return kn.name;
    throw UnknownMaterial("unknown material kind");
}

MaterialKind material_kind_from_string(std::string_view name)
{
    for (const auto &kn : kKindNames)
        if (kn.name == name)
            return kn.kind;
    throw UnknownMaterial("unknown material '" + std::string(name) + "'");
}

double Material::relative_permittivity(double frequency_hz) const
{
    return permittivity_a * std::pow(frequency_hz * 1e-9, permittivity_b);
}

double Material::conductivity(double frequency_hz) const
{
    return conductivity_c * std::pow(frequency_hz * 1e-9, conductivity_d);
}

std::complex<double> Material::complex_permittivity(double frequency_hz) const
{
    const double eps_r = relative_permittivity(frequency_hz);
    const double sigma = conductivity(frequency_hz);
    return {eps_r, -sigma / (2.0 * kPi * frequency_hz * kVacuumPermittivity)};
}

MaterialTable MaterialTable::from_json_text(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument(std::string("material table: ") + e.what());
    }
    MaterialTable table;
    table.source_ = doc.value("table", std::string{});
    table.version_ = doc.value("table_version", 0);
    if (!doc.contains("materials") || !doc["materials"].is_object())
        throw std::invalid_argument("material table: missing 'materials' object");
    for (const auto &[name, row] : doc["materials"].items()) {
        Material m;
        m.kind = material_kind_from_string(name);
        m.permittivity_a = row.at("a").get<double>();
        m.permittivity_b = row.at("b").get<double>();
        m.conductivity_c = row.at("c").get<double>();
        m.conductivity_d = row.at("d").get<double>();
        table.materials_[m.kind] = m;
    }
    return table;
}

const MaterialTable &MaterialTable::builtin()
{
    static const MaterialTable table = from_json_text(detail::kMaterialsJson);
    return table;
}

const Material &MaterialTable::get(MaterialKind kind) const
{
    auto it = materials_.find(kind);
    if (it == materials_.end())
        throw UnknownMaterial("material '" + std::string(to_string(kind)) + "' not in table");
    return it->second;
}

const Material &MaterialTable::by_name(std::string_view name) const
{
    return get(material_kind_from_string(name));
}

} // namespace nff
