#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace festa {

// FIPS 180-4 SHA-256. Used for cache keys and content-addressed staging.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, size_t len);
  // Finalizes and returns the 32-byte digest. The object must not be reused.
  std::array<uint8_t, 32> finish();

 private:
  void process_block(const uint8_t* block);
  uint32_t state_[8];
  uint64_t total_len_ = 0;
  uint8_t buffer_[64];
  size_t buffer_len_ = 0;
};

std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_hex(const std::vector<uint8_t>& bytes);

}  // namespace festa
