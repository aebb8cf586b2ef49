// Copyright 2026 The fluctinit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace fluctinit {

// Base for every error raised by the library. The CLI prints `what()` as a
// single line, so messages never contain newlines.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Requested fluctuation target cannot be reached with the given statistics
// (a weight variance would have to be negative).
class UnreachableTarget : public Error {
 public:
  UnreachableTarget(const std::string& msg, double xi_bound)
      : Error(msg), xi_bound_(xi_bound) {}
  // Largest ξ (smallest σ_U) for which the target is still reachable.
  double xi_bound() const { return xi_bound_; }

 private:
  double xi_bound_;
};

// Corrupt or unsupported on-disk data.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared in a simulation or in training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fluctinit
