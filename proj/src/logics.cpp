#include "kps/logics.hpp"

#include <cstdlib>

namespace kps {

std::string make_payload(const std::string& key, std::uint64_t seq, char tag,
                         std::size_t payload_size) {
  std::string p = key + "|" + std::to_string(seq) + "|" + tag + "|";
  if (p.size() < payload_size) p.append(payload_size - p.size(), 'x');
  return p;
}

std::string payload_key(const std::string& payload) {
  auto pos = payload.find('|');
  return pos == std::string::npos ? std::string() : payload.substr(0, pos);
}

std::uint64_t payload_seq(const std::string& payload) {
  auto a = payload.find('|');
  if (a == std::string::npos) return 0;
  return std::strtoull(payload.c_str() + a + 1, nullptr, 10);
}

char payload_tag(const std::string& payload) {
  auto a = payload.find('|');
  if (a == std::string::npos) return '?';
  auto b = payload.find('|', a + 1);
  if (b == std::string::npos || b + 1 >= payload.size()) return '?';
  return payload[b + 1];
}

std::string with_payload_key(const std::string& payload, const std::string& new_key) {
  auto pos = payload.find('|');
  if (pos == std::string::npos) return new_key;
  return new_key + payload.substr(pos);
}

std::string render_state(std::int64_t number, std::size_t state_size) {
  std::string v = std::to_string(number) + "|";
  if (v.size() < state_size) v.append(state_size - v.size(), 's');
  return v;
}

std::int64_t state_number(const std::string& value) {
  if (value.empty()) return 0;
  return std::strtoll(value.c_str(), nullptr, 10);
}

}  // namespace kps
