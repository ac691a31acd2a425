#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace rodflow {

using Vec3 = Eigen::Vector3d;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations on user-supplied arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Nodal data that cannot be used (degenerate tangents, non-finite values).
class CorruptStateError : public Error {
 public:
  using Error::Error;
};

// The bordered KKT system could not be factorized.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// File I/O and format errors; the message always names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace rodflow
