#pragma once

#include <stdexcept>
#include <string>

namespace panelfield {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation point lies on (within the geometric tolerance of) a panel edge.
class EdgeSingularity : public Error {
 public:
  using Error::Error;
};

/// The normal force component is requested exactly on the panel surface,
/// where it jumps by 4*pi. The tangential components are still well defined
/// and are carried along.
class OnSurfaceAmbiguity : public Error {
 public:
  OnSurfaceAmbiguity(const std::string& what, double fx, double fz)
      : Error(what), fx_(fx), fz_(fz) {}

  double fx() const noexcept { return fx_; }
  double fz() const noexcept { return fz_; }

 private:
  double fx_;
  double fz_;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class InvalidGrading : public Error {
 public:
  using Error::Error;
};

/// A point-source comparator was evaluated exactly at one of its sources.
class CoincidentSource : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

}  // namespace panelfield
