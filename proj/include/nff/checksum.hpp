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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nff {

/// 64-bit FNV-1a digest.
std::uint64_t fnv1a64(const void *data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view bytes);

/// Digest of a whole file; throws std::runtime_error when the file cannot be read.
std::uint64_t fnv1a64_file(const std::filesystem::path &path);

/// 16 lowercase hex digits.
std::string to_hex(std::uint64_t v);
std::uint64_t from_hex(std::string_view s);

} // namespace nff
