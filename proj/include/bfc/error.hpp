#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bfc {

// Base of every library error. kind() is the stable, machine-parseable class
// name printed by the CLI.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define BFC_DEFINE_ERROR(Name)                                             \
  class Name : public Error {                                              \
  public:                                                                  \
    using Error::Error;                                                    \
    const char* kind() const noexcept override { return #Name; }           \
  }

BFC_DEFINE_ERROR(InvalidKeypoint);
BFC_DEFINE_ERROR(IoError);
BFC_DEFINE_ERROR(ConfigError);
BFC_DEFINE_ERROR(EmptyTrainingSet);
BFC_DEFINE_ERROR(InvalidPair);
BFC_DEFINE_ERROR(SymbolError);
BFC_DEFINE_ERROR(TruncatedBitstream);
BFC_DEFINE_ERROR(StreamError);
BFC_DEFINE_ERROR(DegenerateTrainingSet);
BFC_DEFINE_ERROR(DimensionError);
BFC_DEFINE_ERROR(EmptyGop);
BFC_DEFINE_ERROR(InsufficientCandidates);
BFC_DEFINE_ERROR(InsufficientMatches);
BFC_DEFINE_ERROR(UndefinedAP);

#undef BFC_DEFINE_ERROR

// Malformed container bytes. offset() is the byte position where parsing
// stopped.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  const char* kind() const noexcept override { return "FormatError"; }
  std::uint64_t offset() const noexcept { return offset_; }

private:
  std::uint64_t offset_;
};

}  // namespace bfc
