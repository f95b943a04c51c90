#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rvp {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- numerical core ---------------------------------------------------------

// Blaschke denominator collapsed: z is (numerically) the reflected pole 1/conj(a).
class NearSingularity : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

// Fewer sample rows than basis columns requested.
class UnderdeterminedSystem : public Error {
 public:
  using Error::Error;
};

// hyp_segment_params called with two (numerically) identical points.
class DegenerateSegment : public Error {
 public:
  using Error::Error;
};

// Least-squares basis matrix is numerically rank deficient (degenerate pole cluster).
class RankDeficient : public Error {
 public:
  using Error::Error;
};

// Every fitness evaluation of an optimizer run returned the failure sentinel.
class AllEvaluationsFailed : public Error {
 public:
  using Error::Error;
};

// --- I/O ---------------------------------------------------------------------

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyFile : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

class TruncatedData : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// --- codec -------------------------------------------------------------------

class NoBeats : public Error {
 public:
  using Error::Error;
};

class BadMagic : public Error {
 public:
  using Error::Error;
};

class TruncatedStream : public Error {
 public:
  using Error::Error;
};

class InconsistentArchitectureTable : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// --- metrics -------------------------------------------------------------------

class ZeroDenominator : public Error {
 public:
  using Error::Error;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class ZeroBandEnergy : public Error {
 public:
  explicit ZeroBandEnergy(std::size_t band)
      : Error("subband " + std::to_string(band) + " of the original signal has zero energy"),
        band_(band) {}
  std::size_t band() const { return band_; }

 private:
  std::size_t band_;
};

class InsufficientBeats : public Error {
 public:
  using Error::Error;
};

}  // namespace rvp
