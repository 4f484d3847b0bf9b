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

#include <stdexcept>
#include <string>

namespace nff {

// Contract violations (bad arguments, broken preconditions) use std::invalid_argument.
// The types below signal domain conditions callers are expected to handle.

class InfeasibleLayout : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ModeInfeasible : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class UnknownMaterial : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NoPaths : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatch : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IndexError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

class DegenerateChannel : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class UndefinedReference : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace nff
