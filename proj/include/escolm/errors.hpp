// Copyright 2026 The escolm Authors.
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
#include <stdexcept>
#include <string>

namespace escolm {

// Base of every error the library raises. `is_input_error()` separates bad
// user input (exit code 2 at the CLI) from runtime failures (exit code 1).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, bool input_error = false)
      : std::runtime_error(what), input_error_(input_error) {}
  bool is_input_error() const { return input_error_; }

 private:
  bool input_error_;
};

#define ESCOLM_DEFINE_ERROR(Name, input)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(#Name ": " + what, input) {} \
  };

// Taxonomy ingestion.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : Error("SchemaError: line " + std::to_string(line) + ": " + what, true),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};
ESCOLM_DEFINE_ERROR(DanglingReference, true)
ESCOLM_DEFINE_ERROR(DuplicateId, true)
ESCOLM_DEFINE_ERROR(UnknownId, true)
ESCOLM_DEFINE_ERROR(KindError, true)

// Sampling and input construction.
ESCOLM_DEFINE_ERROR(EmptyCorpus, true)
ESCOLM_DEFINE_ERROR(DegenerateRelation, false)
ESCOLM_DEFINE_ERROR(ExhaustedRetries, false)
ESCOLM_DEFINE_ERROR(DegenerateInput, false)

// Model and optimizer.
ESCOLM_DEFINE_ERROR(ShapeError, false)
ESCOLM_DEFINE_ERROR(NonFiniteGradient, false)
ESCOLM_DEFINE_ERROR(ScheduleExhausted, false)
ESCOLM_DEFINE_ERROR(CheckpointError, true)

// Evaluation.
ESCOLM_DEFINE_ERROR(MalformedTag, true)
ESCOLM_DEFINE_ERROR(LengthMismatch, true)
ESCOLM_DEFINE_ERROR(EmptyInput, true)

// Configuration and file handling.
ESCOLM_DEFINE_ERROR(ConfigError, true)
ESCOLM_DEFINE_ERROR(IoError, true)

#undef ESCOLM_DEFINE_ERROR

}  // namespace escolm
