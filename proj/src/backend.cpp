#include "kps/backend.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace kps {
namespace {

void write_u32(std::FILE* f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  std::fwrite(b, 1, 4, f);
}

bool read_u32(std::FILE* f, std::uint32_t* v) {
  unsigned char b[4];
  if (std::fread(b, 1, 4, f) != 4) return false;
  *v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
       (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

// On-disk key bytes: 4-byte little-endian state_id followed by the partition key.
std::string encode_key(const StateKey& k) {
  std::string out;
  out.reserve(4 + k.partition_key.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((k.state_id >> (8 * i)) & 0xFF));
  out.append(k.partition_key);
  return out;
}

StateKey decode_key(const std::string& bytes) {
  if (bytes.size() < 4) throw std::runtime_error("corrupt state file: short key");
  StateKey k;
  for (int i = 0; i < 4; ++i)
    k.state_id |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  k.partition_key = bytes.substr(4);
  return k;
}

}  // namespace

void SimBackend::dump(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> rows;
  {
    MonitorLock lk(*mon_);
    rows.reserve(map_.size());
    for (const auto& [k, v] : map_) rows.emplace_back(encode_key(k), v);
  }
  std::sort(rows.begin(), rows.end());  // reproducible files
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& [k, v] : rows) {
    write_u32(f, static_cast<std::uint32_t>(k.size()));
    std::fwrite(k.data(), 1, k.size(), f);
    write_u32(f, static_cast<std::uint32_t>(v.size()));
    std::fwrite(v.data(), 1, v.size(), f);
  }
  std::fclose(f);
}

void SimBackend::load(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  MonitorLock lk(*mon_);
  std::uint32_t klen;
  while (read_u32(f, &klen)) {
    std::string kbytes(klen, '\0');
    if (std::fread(kbytes.data(), 1, klen, f) != klen) {
      std::fclose(f);
      throw std::runtime_error("corrupt state file: truncated key");
    }
    std::uint32_t vlen;
    if (!read_u32(f, &vlen)) {
      std::fclose(f);
      throw std::runtime_error("corrupt state file: missing value length");
    }
    std::string v(vlen, '\0');
    if (std::fread(v.data(), 1, vlen, f) != vlen) {
      std::fclose(f);
      throw std::runtime_error("corrupt state file: truncated value");
    }
    map_[decode_key(kbytes)] = std::move(v);
  }
  std::fclose(f);
}

}  // namespace kps
