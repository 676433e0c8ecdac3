// Copyright 2026 The streamap Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STREAMAP_ERROR_HPP_
#define STREAMAP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace streamap {

// Failure categories. The CLI maps these onto stable exit codes.
enum class ErrorKind {
  kMalformedInput,   // unparsable file, bad flag value, shape mismatch
  kIntegrity,        // dangling references, duplicate ids
  kInvalidArgument,  // precondition violated by the caller
  kInternal,         // an invariant the library itself should uphold
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace streamap

#endif  // STREAMAP_ERROR_HPP_
