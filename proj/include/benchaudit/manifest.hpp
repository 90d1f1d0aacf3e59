#pragma once

// Provenance sidecar for every emitted output: the exact command line,
// content digests of all inputs, the master seed when one exists, tool
// version, and a timestamp. Matching digests plus seed reproduce outputs
// byte-identically; the timestamp is the only field allowed to drift.

#include <array>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "benchaudit/errors.hpp"
#include "benchaudit/version.hpp"

namespace benchaudit {

// FIPS 180-4 SHA-256, incremental.
class Sha256 {
public:
  Sha256() { reset(); }

  void reset() {
    state_ = {0x6A09E667u, 0xBB67AE85u, 0x3C6EF372u, 0xA54FF53Au,
              0x510E527Fu, 0x9B05688Cu, 0x1F83D9ABu, 0x5BE0CD19u};
    buffered_ = 0;
    total_bits_ = 0;
  }

  void update(const void *data, std::size_t len) {
    const auto *p = static_cast<const unsigned char *>(data);
    total_bits_ += static_cast<std::uint64_t>(len) * 8;
    while (len > 0) {
      const std::size_t take = std::min(len, sizeof buffer_ - buffered_);
      std::memcpy(buffer_ + buffered_, p, take);
      buffered_ += take;
      p += take;
      len -= take;
      if (buffered_ == sizeof buffer_) {
        compress(buffer_);
        buffered_ = 0;
      }
    }
  }

  std::string hex_digest() {
    const std::uint64_t bits = total_bits_;
    const unsigned char pad = 0x80;
    update(&pad, 1);
    const unsigned char zero = 0x00;
    while (buffered_ != 56) update(&zero, 1);
    unsigned char len_be[8];
    for (int i = 0; i < 8; ++i)
      len_be[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    update(len_be, 8);
    std::string out;
    out.reserve(64);
    static const char *hex = "0123456789abcdef";
    for (std::uint32_t word : state_)
      for (int i = 28; i >= 0; i -= 4) out += hex[(word >> i) & 0xF];
    return out;
  }

private:
  static std::uint32_t rotr(std::uint32_t v, int n) {
    return (v >> n) | (v << (32 - n));
  }

  void compress(const unsigned char *block) {
    static constexpr std::uint32_t k[64] = {
        0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B,
        0x59F111F1, 0x923F82A4, 0xAB1C5ED5, 0xD807AA98, 0x12835B01,
        0x243185BE, 0x550C7DC3, 0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7,
        0xC19BF174, 0xE49B69C1, 0xEFBE4786, 0x0FC19DC6, 0x240CA1CC,
        0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA, 0x983E5152,
        0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147,
        0x06CA6351, 0x14292967, 0x27B70A85, 0x2E1B2138, 0x4D2C6DFC,
        0x53380D13, 0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85,
        0xA2BFE8A1, 0xA81A664B, 0xC24B8B70, 0xC76C51A3, 0xD192E819,
        0xD6990624, 0xF40E3585, 0x106AA070, 0x19A4C116, 0x1E376C08,
        0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A, 0x5B9CCA4F,
        0x682E6FF3, 0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208,
        0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(block[4 * i]) << 24) |
             (std::uint32_t(block[4 * i + 1]) << 16) |
             (std::uint32_t(block[4 * i + 2]) << 8) |
             std::uint32_t(block[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 =
          rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 =
          rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = h + s1 + ch + k[i] + w[i];
      const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = s0 + maj;
      h = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
    state_[4] += e;
    state_[5] += f;
    state_[6] += g;
    state_[7] += h;
  }

  std::array<std::uint32_t, 8> state_;
  unsigned char buffer_[64];
  std::size_t buffered_ = 0;
  std::uint64_t total_bits_ = 0;
};

inline std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex_digest();
}

inline std::string sha256_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError(ValidationKind::IoFailure,
                          "cannot open '" + path + "' for hashing");
  Sha256 h;
  char chunk[1 << 16];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0)
    h.update(chunk, static_cast<std::size_t>(in.gcount()));
  return h.hex_digest();
}

struct RunManifest {
  std::string command_line;
  std::vector<std::pair<std::string, std::string>> inputs; // path, sha256
  std::optional<std::uint64_t> master_seed;
  std::string tool_version = BENCHAUDIT_VERSION;
  std::string timestamp; // ISO-8601 UTC; filled at write time when empty

  void add_input(const std::string &path) {
    inputs.emplace_back(path, sha256_file(path));
  }
};

namespace detail {

inline std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char ch : s) {
    switch (ch) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\r': out += "\\r"; break;
    case '\t': out += "\\t"; break;
    default:
      if (static_cast<unsigned char>(ch) < 0x20) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\u%04x", ch);
        out += buf;
      } else {
        out += ch;
      }
    }
  }
  return out;
}

} // namespace detail

inline std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Flat JSON with a fixed field order, so byte comparison across runs only
// ever differs in the timestamp value.
inline std::string manifest_json(const RunManifest &m) {
  std::string out = "{\n";
  out += "  \"command_line\": \"" + detail::json_escape(m.command_line) + "\",\n";
  out += "  \"inputs\": [";
  for (std::size_t i = 0; i < m.inputs.size(); ++i) {
    if (i) out += ",";
    out += "\n    {\"path\": \"" + detail::json_escape(m.inputs[i].first) +
           "\", \"sha256\": \"" + m.inputs[i].second + "\"}";
  }
  out += m.inputs.empty() ? "],\n" : "\n  ],\n";
  out += "  \"master_seed\": ";
  out += m.master_seed ? std::to_string(*m.master_seed) : "null";
  out += ",\n";
  out += "  \"tool_version\": \"" + detail::json_escape(m.tool_version) + "\",\n";
  out += "  \"timestamp\": \"" + detail::json_escape(m.timestamp) + "\"\n";
  out += "}\n";
  return out;
}

inline void write_manifest(RunManifest manifest, const std::string &path) {
  if (manifest.timestamp.empty()) manifest.timestamp = utc_timestamp();
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ValidationError(ValidationKind::IoFailure,
                          "cannot open '" + path + "' for writing");
  out << manifest_json(manifest);
  if (!out)
    throw ValidationError(ValidationKind::IoFailure,
                          "short write to '" + path + "'");
}

} // namespace benchaudit
