// Copyright 2026 The BPAM Authors
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

namespace bpam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad shapes, out-of-range arguments, mismatched dimensions.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Unsupported but well-formed input (bit depth, channel count, version).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Corrupt or truncated input.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Operation called out of order, e.g. backward without a forward cache.
class StateError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, long step = -1)
      : Error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bpam
