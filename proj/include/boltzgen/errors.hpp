// Copyright 2026 The boltzgen Authors
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

namespace boltzgen {

// Every failure raised by the library derives from Error. The CLI maps the
// three families below onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments: wrong dimensions, out-of-range parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

class CapacityError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// Malformed input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite intermediate values and failed calibrations.
class NumericError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Raised when two energy histograms share too few populated bins for a fit.
class InsufficientOverlapError : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

}  // namespace boltzgen
