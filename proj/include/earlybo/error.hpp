// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace earlybo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or domain values (CLI exit 64).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed data files: pool lines, record files (CLI exit 66).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Runtime failures: directory locks, unreachable trainers, aborted
/// studies (CLI exit 65).
class StudyError : public Error {
 public:
  using Error::Error;
};

}  // namespace earlybo
