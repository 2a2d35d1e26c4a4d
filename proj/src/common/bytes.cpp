#include "pirates/common/bytes.hpp"

#include "pirates/common/errors.hpp"

namespace pirates {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::InvalidArgument, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::InvalidArgument, "bad hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

template <std::size_t N>
std::array<std::uint8_t, N> array_from_hex(std::string_view hex) {
  auto bytes = from_hex(hex);
  if (bytes.size() != N) {
    throw Error(ErrorCode::InvalidArgument,
                "expected " + std::to_string(N) + " hex bytes, got " + std::to_string(bytes.size()));
  }
  std::array<std::uint8_t, N> out{};
  std::copy(bytes.begin(), bytes.end(), out.begin());
  return out;
}

template std::array<std::uint8_t, 16> array_from_hex<16>(std::string_view);
template std::array<std::uint8_t, 32> array_from_hex<32>(std::string_view);

std::uint8_t Reader::u8() { return raw(1)[0]; }

ByteView Reader::raw(std::size_t n) {
  if (n > remaining()) {
    throw Error(ErrorCode::Truncated,
                "need " + std::to_string(n) + " bytes, have " + std::to_string(remaining()));
  }
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint64_t Reader::be(int width) {
  auto v = raw(static_cast<std::size_t>(width));
  std::uint64_t out = 0;
  for (auto b : v) out = (out << 8) | b;
  return out;
}

void Reader::expect_done() const {
  if (!done()) {
    throw Error(ErrorCode::TrailingBytes, std::to_string(remaining()) + " unread bytes");
  }
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OversizePlaintext: return "OversizePlaintext";
    case ErrorCode::MalformedPadding: return "MalformedPadding";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::WrongItemSize: return "WrongItemSize";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownMailbox: return "UnknownMailbox";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::OversizeFrame: return "OversizeFrame";
    case ErrorCode::TrailingBytes: return "TrailingBytes";
    case ErrorCode::Oversize: return "Oversize";
    case ErrorCode::RegistrationClosed: return "RegistrationClosed";
    case ErrorCode::BadToken: return "BadToken";
    case ErrorCode::WrongSize: return "WrongSize";
    case ErrorCode::WrongQueryCount: return "WrongQueryCount";
    case ErrorCode::UnknownClient: return "UnknownClient";
    case ErrorCode::PhaseMissed: return "PhaseMissed";
    case ErrorCode::AnswerTimeout: return "AnswerTimeout";
    case ErrorCode::SpawnFailure: return "SpawnFailure";
    case ErrorCode::DeadlineOverrun: return "DeadlineOverrun";
    case ErrorCode::NoFeasible: return "NoFeasible";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ScenarioSyntax: return "ScenarioSyntax";
    case ErrorCode::InternalFault: return "InternalFault";
  }
  return "Unknown";
}

}  // namespace pirates
