#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace windcast {

/// Independent generator for a (seed, stream ids...) tuple; identical tuples
/// always give identical sequences.
inline std::mt19937_64 make_stream(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  for (auto k : keys) {
    words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace windcast
