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
#include <map>
#include <string>
#include <string_view>

namespace nff {

enum class MaterialKind { Concrete, Marble, Wood, Metal, MediumDryGround, Custom };

std::string_view to_string(MaterialKind kind);
MaterialKind material_kind_from_string(std::string_view name); // throws UnknownMaterial

/// Frequency power-law material model: eps_r = a * f_GHz^b, sigma = c * f_GHz^d [S/m].
struct Material {
    MaterialKind kind = MaterialKind::Custom;
    double permittivity_a = 1.0;
    double permittivity_b = 0.0;
    double conductivity_c = 0.0;
    double conductivity_d = 0.0;

    double relative_permittivity(double frequency_hz) const;
    double conductivity(double frequency_hz) const;

    /// eta = eps_r - j * sigma / (2 pi f eps_0)
    std::complex<double> complex_permittivity(double frequency_hz) const;

    friend bool operator==(const Material &, const Material &) = default;
};

/// Material constants loaded from the embedded data file (data/itu_materials.json).
class MaterialTable {
  public:
    /// Parses a table in the data-file schema. Throws std::invalid_argument on malformed input.
    static MaterialTable from_json_text(std::string_view text);

    /// The table compiled into the library.
    static const MaterialTable &builtin();

    const Material &get(MaterialKind kind) const;     // throws UnknownMaterial
    const Material &by_name(std::string_view name) const; // throws UnknownMaterial

    const std::string &source() const { return source_; }
    int version() const { return version_; }

  private:
    std::map<MaterialKind, Material> materials_;
    std::string source_;
    int version_ = 0;
};

} // namespace nff
