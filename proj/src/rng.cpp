#include "qbench/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qbench/error.hpp"

namespace qbench {

std::string InstanceKey::seedString() const {
  return class_name + ":" + std::to_string(dimension) + ":" + std::to_string(index) + ":" +
         stream_tag;
}

void checkClassName(std::string_view name) {
  if (name.size() != 3) {
    throw ValidationError("malformed class name '" + std::string(name) +
                          "': expected <case 1-9><|or/><C|I|J>");
  }
  if (name[0] < '1' || name[0] > '9') {
    throw ValidationError("malformed class name '" + std::string(name) + "': case token '" +
                          std::string(1, name[0]) + "' is not in 1..9");
  }
  if (name[1] != '|' && name[1] != '/') {
    throw ValidationError("malformed class name '" + std::string(name) +
                          "': alignment token '" + std::string(1, name[1]) +
                          "' is not '|' or '/'");
  }
  if (name[2] != 'C' && name[2] != 'I' && name[2] != 'J') {
    throw ValidationError("malformed class name '" + std::string(name) + "': shape token '" +
                          std::string(1, name[2]) + "' is not C, I or J");
  }
}

std::uint32_t fnv1a32(std::string_view bytes) {
  std::uint32_t hash = 2166136261u;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 16777619u;
  }
  return hash;
}

std::uint32_t seedFromKey(const InstanceKey& key) {
  checkClassName(key.class_name);
  if (key.dimension < 2) {
    throw ValidationError("dimension must be >= 2, got " + std::to_string(key.dimension));
  }
  if (key.stream_tag != "geo" && key.stream_tag != "aff") {
    throw ValidationError("unknown stream tag '" + key.stream_tag + "'");
  }
  return fnv1a32(key.seedString());
}

std::pair<double, double> boxMuller(double u1, double u2) {
  if (u1 == 0.0) u1 = std::numeric_limits<double>::denorm_min();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double RandomStream::nextUniform() {
  const std::uint32_t a = nextWord() >> 5;
  const std::uint32_t b = nextWord() >> 6;
  return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
}

double RandomStream::nextGaussian() {
  if (cached_gaussian_) {
    const double value = *cached_gaussian_;
    cached_gaussian_.reset();
    return value;
  }
  const double u1 = nextUniform();
  const double u2 = nextUniform();
  const auto [first, second] = boxMuller(u1, u2);
  cached_gaussian_ = second;
  return first;
}

std::size_t RandomStream::nextIndex(std::size_t n) {
  const auto k = static_cast<std::size_t>(nextUniform() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

std::vector<std::size_t> samplePermutation(RandomStream& stream, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t k = n; k-- > 1;) {
    std::swap(perm[k], perm[stream.nextIndex(k + 1)]);
  }
  return perm;
}

std::vector<double> sampleTruncatedGaussianVector(RandomStream& stream, std::size_t d,
                                                  double bound) {
  if (!(bound > 0.0)) throw ValidationError("truncation bound must be positive");
  std::vector<double> v(d);
  for (auto& x : v) {
    do {
      x = stream.nextGaussian();
    } while (std::abs(x) > bound);
  }
  return v;
}

}  // namespace qbench
