// Copyright 2026 The SBSTAR Authors.
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

#ifndef SBSTAR_ERROR_H_
#define SBSTAR_ERROR_H_

#include <stdexcept>
#include <string>

namespace sbstar {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. The message carries file and line context.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Violated operation precondition (empty candidate set, single-class
// training data, unknown entity, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace sbstar

#endif  // SBSTAR_ERROR_H_
