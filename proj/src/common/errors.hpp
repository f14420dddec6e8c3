/* Copyright (c) 2026 The hogformer-cpp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <stdexcept>
#include <string>

namespace hogformer {

// Base of every exception thrown by the library. The C API maps each
// subclass onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid shapes, divisibility violations, bad hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad user data: NaN keys, wrong channel count, empty classes.
class InputError : public Error {
 public:
  using Error::Error;
};

// Index outside the addressed extent.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward() on a non-scalar.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed image / manifest files.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// File system failures: missing files, unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite values detected during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hogformer
