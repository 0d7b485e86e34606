/*
 Copyright 2026 The smoothmpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace smoothmpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The constraint polytope is empty. `certificate` holds y >= 0 with
/// y^T A = 0 and y^T b < 0 (a Farkas separating certificate) when available.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, Vector certificate = Vector())
      : Error(what), certificate_(std::move(certificate)) {}
  const Vector& certificate() const { return certificate_; }

 private:
  Vector certificate_;
};

class UnboundedError : public Error {
 public:
  using Error::Error;
};

/// Principal submatrix [G H^-1 G^T]_sigma is singular.
class DegenerateActiveSetError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver stopped without meeting its tolerance. Carries the last
/// iterate so callers can inspect it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Vector last_iterate = Vector())
      : Error(what), last_(std::move(last_iterate)) {}
  const Vector& last_iterate() const { return last_; }

 private:
  Vector last_;
};

/// Exponential enumeration was refused because the instance is too large.
class EnumerationRefused : public Error {
 public:
  using Error::Error;
};

/// The origin is not a strict interior point of the constraint polytope.
class OriginNotInteriorError : public Error {
 public:
  using Error::Error;
};

/// More than half of the Monte-Carlo samples failed to evaluate.
class SmoothingError : public Error {
 public:
  using Error::Error;
};

/// A sampling grid is too coarse for the feature it must resolve.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace smoothmpc
