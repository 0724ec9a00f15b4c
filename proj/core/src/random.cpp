#include "colonist/random.hpp"

namespace colonist {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t experiment,
                          std::uint64_t replica) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ experiment);
  return splitmix64(h ^ replica);
}

RandomSource RandomSource::for_stream(std::uint64_t master,
                                      std::uint64_t experiment,
                                      std::uint64_t replica) {
  return RandomSource(derive_seed(master, experiment, replica));
}

std::uint64_t experiment_id(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace colonist
