#pragma once

#include <stdexcept>
#include <string>

namespace kinemesh {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class FormatError : public Error {
 public:
  FormatError(const std::string& message, size_t line = 0);
  size_t line() const {
    return line_;
  }

 private:
  size_t line_;
};

// Faces that are not triangles, or triangles that reference invalid/repeated vertices.
class TopologyError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Skeleton parents that do not form a single rooted tree.
class SkeletonError : public Error {
 public:
  using Error::Error;
};

class CorrespondenceError : public Error {
 public:
  using Error::Error;
};

// Interior voxelization produced no interior voxels.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class EmbeddingError : public Error {
 public:
  EmbeddingError(const std::string& message, size_t joint);
  size_t joint() const {
    return joint_;
  }

 private:
  size_t joint_;
};

// Non-finite loss or gradient during optimization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

} // namespace kinemesh
