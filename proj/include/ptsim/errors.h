/* Copyright 2026 The ptsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PTSIM_ERRORS_H_
#define PTSIM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ptsim {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes, so each failure category gets its own type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A model, mesh, or run configuration that violates an invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad user input at run time, e.g. an out-of-range token id.
class InputError : public Error {
 public:
  using Error::Error;
};

// Collective protocol violation on the simulated mesh.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ptsim

#endif  // PTSIM_ERRORS_H_
