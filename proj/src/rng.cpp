#include "dfscore/rng.hpp"

#include <array>
#include <cstring>
#include <stdexcept>

#include <sodium.h>

namespace dfscore {
namespace {

void put_le(std::uint64_t v, unsigned char* out) {
  for (int k = 0; k < 8; ++k) out[k] = static_cast<unsigned char>(v >> (8 * k));
}

bool sodium_ready() {
  static const bool ok = sodium_init() >= 0;
  return ok;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  if (!sodium_ready()) throw std::runtime_error("libsodium initialisation failed");
  std::array<unsigned char, 24> msg{};
  put_le(base, msg.data());
  put_le(a, msg.data() + 8);
  put_le(b, msg.data() + 16);
  std::array<unsigned char, 16> digest{};
  crypto_generichash(digest.data(), digest.size(), msg.data(), msg.size(), nullptr, 0);
  std::uint64_t out = 0;
  for (int k = 7; k >= 0; --k) out = (out << 8) | digest[static_cast<std::size_t>(k)];
  return out;
}

}  // namespace dfscore
