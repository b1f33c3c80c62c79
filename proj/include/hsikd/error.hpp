// Copyright 2026 The hsikd Authors. All Rights Reserved.
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

namespace hsikd {

// Error taxonomy. The category determines the CLI exit code:
// validation -> 1, io -> 2, numeric -> 3.
enum class ErrorCategory { validation, io, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::validation, what) {}
};

class DimensionError : public ValidationError {
 public:
  explicit DimensionError(const std::string& what) : ValidationError(what) {}
};

class SplitError : public ValidationError {
 public:
  explicit SplitError(const std::string& what) : ValidationError(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorCategory::io, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCategory::numeric, what) {}
};

class ConvergenceError : public NumericError {
 public:
  explicit ConvergenceError(const std::string& what) : NumericError(what) {}
};

class UpdateError : public NumericError {
 public:
  explicit UpdateError(const std::string& what) : NumericError(what) {}
};

class GenerationError : public NumericError {
 public:
  explicit GenerationError(const std::string& what) : NumericError(what) {}
};

class UndefinedKappaError : public NumericError {
 public:
  explicit UndefinedKappaError(const std::string& what) : NumericError(what) {}
};

}  // namespace hsikd
