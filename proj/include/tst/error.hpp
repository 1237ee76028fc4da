/*
 * Copyright 2026 The TST Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace tst {

enum class ErrorKind {
  Dimension,
  Domain,
  Contract,
  EmptyInput,
  Parse,
  Schema,
  Io,
  Checkpoint,
  Diverged,
  Config,
};

// Base for everything the core throws. The C API maps kind() onto its
// status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define TST_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

TST_DEFINE_ERROR(DimensionError, Dimension)
TST_DEFINE_ERROR(DomainError, Domain)
TST_DEFINE_ERROR(ContractError, Contract)
TST_DEFINE_ERROR(EmptyInputError, EmptyInput)
TST_DEFINE_ERROR(SchemaError, Schema)
TST_DEFINE_ERROR(IoError, Io)
TST_DEFINE_ERROR(CheckpointError, Checkpoint)
TST_DEFINE_ERROR(DivergenceError, Diverged)
TST_DEFINE_ERROR(ConfigError, Config)

#undef TST_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tst
