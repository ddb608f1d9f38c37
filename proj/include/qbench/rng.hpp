#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qbench {

// Identifies one random stream of one benchmark instance. The seed string
// "<class_name>:<dimension>:<index>:<stream_tag>" is the instance identity.
struct InstanceKey {
  std::string class_name;
  int dimension = 0;
  std::uint64_t index = 0;
  std::string stream_tag;  // "geo" or "aff"

  std::string seedString() const;
};

// Throws ValidationError naming the offending token unless `name` matches
// [1-9](|or/)(C|I|J).
void checkClassName(std::string_view name);

std::uint32_t fnv1a32(std::string_view bytes);

std::uint32_t seedFromKey(const InstanceKey& key);

// Basic Box-Muller transform: returns (cos twin, sin twin).
std::pair<double, double> boxMuller(double u1, double u2);

/// MT19937 with fixed variate recipes. Instance identity depends on every
/// draw here, so none of the recipes may change.
class RandomStream {
 public:
  explicit RandomStream(std::uint32_t seed) : engine_(seed) {}

  std::uint32_t nextWord() { return static_cast<std::uint32_t>(engine_()); }

  // genrand_res53: 53-bit uniform in [0, 1).
  double nextUniform();

  double nextGaussian();

  // floor(nextUniform() * n), i.e. uniform on {0..n-1}.
  std::size_t nextIndex(std::size_t n);

 private:
  std::mt19937 engine_;
  std::optional<double> cached_gaussian_;
};

// Fisher-Yates from the back: position k swaps with floor(u * (k + 1)).
std::vector<std::size_t> samplePermutation(RandomStream& stream, std::size_t n);

// Componentwise rejection: each entry is redrawn until |value| <= bound.
std::vector<double> sampleTruncatedGaussianVector(RandomStream& stream, std::size_t d,
                                                  double bound);

}  // namespace qbench
