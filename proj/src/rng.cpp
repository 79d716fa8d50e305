#include "cim/rng.hpp"

namespace cim {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t trajectory_index,
                     std::string_view stream_label) {
  // Chain the three key parts through splitmix so that nearby keys land on
  // unrelated seeds.
  std::uint64_t x = master_seed;
  std::uint64_t key = splitmix64(x);
  x = key ^ trajectory_index;
  key = splitmix64(x);
  x = key ^ fnv1a(stream_label);
  splitmix64(x);
  for (auto& word : state_) word = splitmix64(x);
}

RngStream derive_stream(std::uint64_t master_seed,
                        std::uint64_t trajectory_index,
                        std::string_view stream_label) {
  return RngStream(master_seed, trajectory_index, stream_label);
}

}  // namespace cim
