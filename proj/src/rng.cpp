#include "cdrp/rng.hpp"

namespace cdrp {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;
constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMulA, ctr[0], lo0, hi0);
    mulhilo(kMulB, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

SeedSpec SeedSpec::child(std::uint64_t index) const {
  return {master_seed, splitmix64(stream_id ^ splitmix64(index + 0x632be59bd9b4e019ull))};
}

Philox4x32::Philox4x32(const SeedSpec& seed) {
  key_ = {static_cast<std::uint32_t>(seed.master_seed),
          static_cast<std::uint32_t>(seed.master_seed >> 32)};
  counter_ = {0, 0, static_cast<std::uint32_t>(seed.stream_id),
              static_cast<std::uint32_t>(seed.stream_id >> 32)};
}

void Philox4x32::seek(std::uint64_t block) {
  counter_[0] = static_cast<std::uint32_t>(block);
  counter_[1] = static_cast<std::uint32_t>(block >> 32);
  buffered_ = 0;
}

void Philox4x32::refill() {
  const auto out = philox_block(counter_, key_);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  buffered_ = 2;
  if (++counter_[0] == 0) ++counter_[1];
}

std::uint64_t Philox4x32::operator()() {
  if (buffered_ == 0) refill();
  return buffer_[2 - buffered_--];
}

}  // namespace cdrp
