#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace longdoc {

inline constexpr const char* kVersion = "1.0.0";

// Error with the pipeline stage that raised it, so the CLI can name the
// failing stage on abort.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Attention input longer than the configured context cap.
class ContextOverflowError : public std::runtime_error {
 public:
  ContextOverflowError(std::size_t length, std::size_t limit)
      : std::runtime_error("sequence of " + std::to_string(length) +
                           " tokens exceeds attention context limit of " +
                           std::to_string(limit)),
        length_(length),
        limit_(limit) {}
  std::size_t length() const { return length_; }
  std::size_t limit() const { return limit_; }

 private:
  std::size_t length_;
  std::size_t limit_;
};

// Non-finite value produced mid-computation; carries the position index.
class NumericError : public std::runtime_error {
 public:
  NumericError(std::size_t position, const std::string& what)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

void warn(const std::string& message);

// FNV-1a, used for content hashes and seed derivation. Not cryptographic.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer over the xor; good diffusion for cheap.
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

// Per-stage seed from the single global knob. Stage isolation: changing the
// global seed changes every stage, but stages never share a stream.
inline std::uint64_t derive_seed(std::uint64_t global_seed,
                                 std::string_view stage) {
  return hash_combine(fnv1a64(stage), global_seed);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written to disjoint, pre-sized slots so the outcome is independent of the
// schedule.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace longdoc
