#include <bit>
#include <cstring>
#include <stdexcept>

#include "bssnmr/io.hpp"

namespace bssnmr {

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

void to_little_endian(unsigned char* bytes) {
  if constexpr (std::endian::native == std::endian::big)
    for (int i = 0; i < 4; ++i) std::swap(bytes[i], bytes[7 - i]);
}
}  // namespace

std::string encode_doubles(std::span<const double> values) {
  std::string bytes(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::memcpy(&bytes[i * 8], &values[i], 8);
    to_little_endian(reinterpret_cast<unsigned char*>(&bytes[i * 8]));
  }
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    if (rest == 2) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<double> decode_doubles(const std::string& text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 payload length is not a multiple of 4");
  std::string bytes;
  bytes.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int c[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      if (text[i + k] == '=' && i + 4 == text.size() && k >= 2) {
        c[k] = 0;
        ++pad;
      } else {
        c[k] = decode_char(text[i + k]);
        if (c[k] < 0 || pad) throw std::invalid_argument("invalid base64 payload");
      }
    }
    const unsigned v = (c[0] << 18) | (c[1] << 12) | (c[2] << 6) | c[3];
    bytes += static_cast<char>((v >> 16) & 255);
    if (pad < 2) bytes += static_cast<char>((v >> 8) & 255);
    if (pad < 1) bytes += static_cast<char>(v & 255);
  }
  if (bytes.size() % 8 != 0) throw std::invalid_argument("base64 payload is not a whole number of float64 values");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    to_little_endian(reinterpret_cast<unsigned char*>(&bytes[i * 8]));
    std::memcpy(&out[i], &bytes[i * 8], 8);
  }
  return out;
}

}  // namespace bssnmr
