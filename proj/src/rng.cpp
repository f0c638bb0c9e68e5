#include "pfsw/rng.hpp"

namespace pfsw {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, const StreamId& id) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ id.particle);
  k = splitmix64(k ^ id.step);
  k = splitmix64(k ^ static_cast<std::uint64_t>(id.purpose));
  key_ = splitmix64(k ^ id.sub);
}

RngStream::result_type RngStream::operator()() {
  // splitmix64 is itself counter-based: output i is mix(key + i * golden).
  return splitmix64(key_ + kGolden * counter_++);
}

double RngStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double RngStream::normal() { return normal_(*this); }

}  // namespace pfsw
