#pragma once

#include <stdexcept>
#include <string>

namespace aucm {

/// Base for every error raised by the library. Messages are meant for humans
/// and name the offending row, key, epoch or batch where one exists.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data or arguments violate a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A batch, split or dataset is missing one of the two classes.
class SingleClassError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// CSV, checkpoint or config text could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch, int batch)
      : Error(what), epoch_(epoch), batch_(batch) {}

  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

}  // namespace aucm
