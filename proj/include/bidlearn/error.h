// Copyright 2026 The bidlearn Authors
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

#ifndef BIDLEARN_ERROR_H_
#define BIDLEARN_ERROR_H_

#include <stdexcept>
#include <string>

namespace bidlearn {

// Failure categories. The C API maps each one onto a bl_status code.
enum class ErrorKind {
  kConfig,      // malformed or inconsistent configuration
  kValidation,  // an argument outside its admissible domain
  kNumeric,     // NaN/Inf produced by a computation
  kState,       // operation called in the wrong object state
  kIo,          // filesystem failure
  kResource,    // request exceeds a hard size guard
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what)
      : Error(ErrorKind::kState, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& what)
      : Error(ErrorKind::kResource, what) {}
};

}  // namespace bidlearn

#endif  // BIDLEARN_ERROR_H_
