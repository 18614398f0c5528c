#pragma once

#include <stdexcept>
#include <string>

namespace s2st {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
struct ShapeError : Error {
  using Error::Error;
};

// Language code not present in the registry.
struct UnknownLanguageError : Error {
  using Error::Error;
};

// Token not present in a vocabulary.
struct VocabularyError : Error {
  using Error::Error;
};

// CTC label sequence contains the blank index.
struct InvalidLabelError : Error {
  using Error::Error;
};

// Instance too large for exhaustive enumeration.
struct SizeError : Error {
  using Error::Error;
};

// Bad run configuration; message carries the offending field path.
struct ConfigError : Error {
  using Error::Error;
};

// Checkpoint magic/version/contents incompatible.
struct CheckpointError : Error {
  using Error::Error;
};

// Training produced a non-finite loss.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace s2st
