#include "sgdinfer/rng.hpp"

#include <bit>
#include <random>

namespace sgdinfer {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed),
      stream_index_(stream_index),
      key_(mix64(mix64(master_seed) ^ mix64(stream_index + 0x632be59bd9b4e019ULL))) {
  std::uint64_t s = key_;
  for (auto& word : state_) {
    s += 0x9e3779b97f4a7c15ULL;
    word = mix64(s);
  }
  // xoshiro must not start from the all-zero state
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

RngStream::result_type RngStream::operator()() {
  const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = std::rotl(state_[3], 45);
  return result;
}

RngStream RngStream::split(std::uint64_t child_index) const { return RngStream(key_, child_index); }

RngStream RngStream::fork() {
  const std::uint64_t seed = (*this)();
  return RngStream(seed, 0);
}

std::size_t RngStream::uniform_index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(*this);
}

double RngStream::uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

}  // namespace sgdinfer
