#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dsb {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                              std::uint64_t d = 0, std::uint64_t e = 0) {
  std::uint64_t state = a;
  std::uint64_t h = splitmix64(state);
  state ^= b;
  h ^= splitmix64(state);
  state ^= c;
  h ^= splitmix64(state);
  state ^= d;
  h ^= splitmix64(state);
  state ^= e;
  h ^= splitmix64(state);
  return h;
}

// Random stream with explicit variate algorithms (uniform bits -> double,
// Box-Muller normals) so sequences are bit-identical across standard
// libraries. std::normal_distribution is implementation-defined and would
// break the reproducibility contract.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1], safe as a log() argument.
  double uniform01_open_below() { return 1.0 - uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open_below();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * pi() * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  std::uint64_t next_bits() { return engine_(); }

  static constexpr double pi() { return 3.14159265358979323846; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream addressing: every random draw in the harness belongs to a stream
// keyed by (master seed, context id, replicate index) plus a role/index pair
// inside the replicate. Replicates can therefore run in parallel and fold in
// index order with bit-identical results.
struct StreamKey {
  std::uint64_t master = 0;
  std::uint64_t context = 0;
  std::uint64_t replicate = 0;
};

namespace stream_role {
constexpr std::uint64_t kStickField = 1;
constexpr std::uint64_t kSharedStick = 2;
constexpr std::uint64_t kAtomField = 3;
constexpr std::uint64_t kIidAtom = 4;
constexpr std::uint64_t kGeneric = 5;
}  // namespace stream_role

inline RngStream make_stream(const StreamKey& key, std::uint64_t role, std::uint64_t index = 0) {
  return RngStream(mix_seed(key.master, key.context, key.replicate, role, index));
}

// Context ids (probe / command identifiers entering stream derivation).
namespace stream_context {
constexpr std::uint64_t kMarginalProbe = 1;
constexpr std::uint64_t kContinuityProbe = 2;
constexpr std::uint64_t kTvContrastProbe = 3;
constexpr std::uint64_t kAssociationProbe = 4;
constexpr std::uint64_t kSupportProbe = 5;
constexpr std::uint64_t kKlSupportProbe = 6;
constexpr std::uint64_t kMixtureTvProbe = 7;
constexpr std::uint64_t kSimulate = 100;
constexpr std::uint64_t kTargetFreeze = 200;
}  // namespace stream_context

}  // namespace dsb
