#include "eigensr/wire.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace eigensr::wire {

std::string sha256_hex(const uint8_t *data, size_t len) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  if (EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  out.reserve(digest_len * 2);
  for (unsigned i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace eigensr::wire
