#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maxent {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent caller input (non-finite values, bad
/// dimensions, unparsable files).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  RankDeficient(std::size_t rank, std::size_t expected)
      : Error("matrix is rank deficient: numerical rank " + std::to_string(rank) + " < " +
              std::to_string(expected)),
        rank_(rank) {}
  std::size_t rank() const { return rank_; }

 private:
  std::size_t rank_;
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(std::size_t pivot)
      : Error("matrix is not positive definite (pivot " + std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

/// A natural parameter fell outside the admissible domain of its kind.
class DomainViolation : public Error {
 public:
  DomainViolation(const std::string& what, std::size_t index)
      : Error(what + " (coordinate " + std::to_string(index) + ")"), index_(index) {}
  explicit DomainViolation(const std::string& what) : Error(what), index_(0) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class EmptyInterval : public Error {
 public:
  using Error::Error;
};

/// A chain state touches the boundary of the prior's support.
class BoundaryState : public Error {
 public:
  using Error::Error;
};

class InfeasibleStart : public Error {
 public:
  using Error::Error;
};

class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

class SupportViolation : public Error {
 public:
  SupportViolation(const std::string& what, std::size_t layer)
      : Error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}
  std::size_t layer() const { return layer_; }

 private:
  std::size_t layer_;
};

class ReconstructionInfeasible : public Error {
 public:
  explicit ReconstructionInfeasible(std::size_t layer)
      : Error("gamma inverse did not converge at layer " + std::to_string(layer)), layer_(layer) {}
  std::size_t layer() const { return layer_; }

 private:
  std::size_t layer_;
};

class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(std::size_t epoch, const std::string& reason = "loss is not finite")
      : Error("training diverged at epoch " + std::to_string(epoch) + ": " + reason), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace maxent
