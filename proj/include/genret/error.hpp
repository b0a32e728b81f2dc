//
// Copyright (C) 2026 The genret Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <stdexcept>
#include <string>

namespace genret {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not compose.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid or out-of-range configuration. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data, missing items, duplicate docIDs. CLI exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite losses or gradients, zero-norm vectors. CLI exit code 4.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Lookup of an unknown key (item id, trie node, position weight).
class IndexError : public DataError {
 public:
  using DataError::DataError;
};

/// Corrupt or unsupported persisted file.
class LoadError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace genret
