#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "powdag/types.hpp"

namespace powdag {

namespace detail {

inline void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i) & 0xff));
}

inline void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i) & 0xff));
}

}  // namespace detail

/// Length-prefixed little-endian encoding: payload, reference ids in stored
/// order, miner id.
inline std::string canonical_encoding(std::string_view payload,
                                      std::span<const BlockId> refs,
                                      MinerId miner) {
  std::string out;
  out.reserve(8 + payload.size() + 8 + refs.size() * 32 + 4);
  detail::append_u64(out, payload.size());
  out.append(payload);
  detail::append_u64(out, refs.size());
  for (const auto& r : refs) {
    out.append(reinterpret_cast<const char*>(r.bytes.data()), r.bytes.size());
  }
  detail::append_u32(out, miner.value);
  return out;
}

inline BlockId sha256(std::string_view data) {
  BlockId id;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), id.bytes.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != id.bytes.size()) {
    throw std::runtime_error("EVP_Digest(sha256) failed");
  }
  return id;
}

inline BlockId block_digest(std::string_view payload, std::span<const BlockId> refs,
                            MinerId miner) {
  return sha256(canonical_encoding(payload, refs, miner));
}

}  // namespace powdag
