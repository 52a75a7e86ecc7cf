// Copyright 2026 The AIRI Authors.
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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace airi {

// Base of every error raised by the library. Anything deriving from Error is
// a problem with the caller's input; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for invariants the library itself should have guaranteed.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Structure parsing / standardization failure. `offset` is the byte offset
// into the SMILES text (or the 1-based line for MOLfiles) when known.
class ChemError : public Error {
 public:
  explicit ChemError(const std::string& what,
                     std::optional<std::size_t> offset = std::nullopt)
      : Error(offset ? what + " (at offset " + std::to_string(*offset) + ")"
                     : what),
        offset_(offset) {}

  std::optional<std::size_t> offset() const { return offset_; }

 private:
  std::optional<std::size_t> offset_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Dataset / CSV schema problems.
class DataError : public Error {
 public:
  using Error::Error;
};

// Z score requested with a zero standard deviation.
class UndefinedZError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace airi
