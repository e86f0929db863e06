// Copyright 2026-present the nigmrf authors
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

namespace nigmrf {

// Base for every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file: bad magic, version, truncation.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input carrying unusable values (non-finite voxels, channel mismatch in data).
class DataError : public Error {
 public:
  using Error::Error;
};

// Distribution or model parameters violate their invariants.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Singular blocks, non-finite gradients, failed factorizations.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Caller misuse: invalid configuration, empty candidate lists, mismatched splits.
class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nigmrf
