#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace powdag {

/// Dense handle of a block inside one BlockDag. Insertion order is a
/// topological order, so a block's index is larger than every index in its
/// past.
using BlockIndex = std::uint32_t;
inline constexpr BlockIndex kNoBlock = ~BlockIndex{0};

/// Reward amounts in integer micro-units.
using Micro = std::int64_t;

struct MinerId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(MinerId, MinerId) = default;
};

/// Reserved identity carried by the genesis block.
inline constexpr MinerId kGenesisMiner{0};

/// 32-byte digest of a block's canonical serialization. Ordered
/// lexicographically over bytes; that order breaks chain-selection ties.
struct BlockId {
  std::array<std::uint8_t, 32> bytes{};

  friend constexpr auto operator<=>(const BlockId&, const BlockId&) = default;

  std::string hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(64, '0');
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      out[2 * i] = kDigits[bytes[i] >> 4];
      out[2 * i + 1] = kDigits[bytes[i] & 0xf];
    }
    return out;
  }

  /// First 8 hex digits, for logs and diagnostics.
  std::string short_hex() const { return hex().substr(0, 8); }

  static BlockId from_hex(std::string_view text);
};

enum class ErrorCode {
  unknown_reference,
  empty_references,
  duplicate_reference,
  duplicate_block,
  unknown_block,
  prefix_mismatch,
  not_an_ancestor,
  not_in_past,
  stale_subject,
  finality_violation,
  config_invalid,
  parse_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_reference: return "UnknownReference";
    case ErrorCode::empty_references: return "EmptyReferences";
    case ErrorCode::duplicate_reference: return "DuplicateReference";
    case ErrorCode::duplicate_block: return "DuplicateBlock";
    case ErrorCode::unknown_block: return "UnknownBlock";
    case ErrorCode::prefix_mismatch: return "PrefixMismatch";
    case ErrorCode::not_an_ancestor: return "NotAnAncestor";
    case ErrorCode::not_in_past: return "NotInPast";
    case ErrorCode::stale_subject: return "StaleSubject";
    case ErrorCode::finality_violation: return "FinalityViolation";
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline BlockId BlockId::from_hex(std::string_view text) {
  if (text.size() != 64) {
    throw Error(ErrorCode::parse_error, "block id must be 64 hex digits");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(ErrorCode::parse_error, "bad hex digit");
  };
  BlockId id;
  for (std::size_t i = 0; i < id.bytes.size(); ++i) {
    id.bytes[i] = static_cast<std::uint8_t>(nibble(text[2 * i]) << 4 |
                                            nibble(text[2 * i + 1]));
  }
  return id;
}

inline std::string to_hex(std::string_view raw) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(raw.size() * 2);
  for (unsigned char c : raw) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xf]);
  }
  return out;
}

inline std::string from_hex(std::string_view text) {
  if (text.size() % 2 != 0) {
    throw Error(ErrorCode::parse_error, "odd-length hex string");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(ErrorCode::parse_error, "bad hex digit");
  };
  std::string out(text.size() / 2, '\0');
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<char>(nibble(text[2 * i]) << 4 | nibble(text[2 * i + 1]));
  }
  return out;
}

}  // namespace powdag

template <>
struct std::hash<powdag::BlockId> {
  std::size_t operator()(const powdag::BlockId& id) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
      h = h << 8 | id.bytes[i];
    }
    return h;
  }
};
