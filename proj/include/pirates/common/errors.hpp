#pragma once

#include <stdexcept>
#include <string>

namespace pirates {

enum class ErrorCode {
  // crypto
  OversizePlaintext,
  MalformedPadding,
  // pir
  IndexOutOfRange,
  WrongItemSize,
  LengthMismatch,
  // bucket mapping
  UnknownMailbox,
  InvalidArgument,
  // wire
  Truncated,
  UnknownType,
  OversizeFrame,
  TrailingBytes,
  Oversize,
  // nodes
  RegistrationClosed,
  BadToken,
  WrongSize,
  WrongQueryCount,
  UnknownClient,
  // client
  PhaseMissed,
  AnswerTimeout,
  // testbed
  SpawnFailure,
  DeadlineOverrun,
  NoFeasible,
  IoError,
  ScenarioSyntax,
  // internal
  InternalFault,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pirates
