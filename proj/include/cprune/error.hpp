/* Copyright 2026 The cprune Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CPRUNE_ERROR_HPP_
#define CPRUNE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cprune {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-supplied parameters out of their documented range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shape inference or dimension mismatch; the message names the node.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  enum class Kind { kHeader, kVersion, kTruncated, kChecksum, kManifest };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class PruneError : public Error {
 public:
  enum class Kind {
    kWouldEmptyLayer,
    kIndexOutOfRange,
    kInvalidRequest,
    kNotConv,
    kUnsupportedConsumer,
    kStaleCluster,
    kEmptyCandidates,
  };

  PruneError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Measured-trace lookup miss.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace cprune

#endif  // CPRUNE_ERROR_HPP_
