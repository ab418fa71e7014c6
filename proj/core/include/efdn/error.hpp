// Copyright 2026 The EFDN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace efdn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape or channel-count mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid static configuration (even kernel, identity with C != O, unknown filter).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Data-dependent input problem (image too small, mismatched pair).
class InputError : public Error {
public:
    using Error::Error;
};

// API misuse (non-scalar backward root, empty dataset, merging twice).
class UsageError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace efdn
