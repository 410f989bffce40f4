#ifndef APL_COMMON_HPP_
#define APL_COMMON_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace apl {

enum class ErrorKind {
  kInvalidArgument,
  kCapacityExceeded,
  kInvalidState,
  kTrainingDiverged,
  kDegenerateScene,
  kNoDetection,
  kConfigError,
  kMissingArtifact,
  kIoError,
};

std::string_view to_string(ErrorKind kind);

// All failures raised by the library carry a kind so the CLI can map them to
// exit codes and tests can assert on the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_{kind} {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent substreams from a root seed.
constexpr uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t hash_name(std::string_view name) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Named substream: substream(root, "estimator", scene, episode) etc.
inline uint64_t substream(uint64_t root, std::string_view name, uint64_t a = 0,
                          uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(root ^ hash_name(name)) + a) + b);
}

inline Rng make_rng(uint64_t root, std::string_view name, uint64_t a = 0,
                    uint64_t b = 0) {
  return Rng(substream(root, name, a, b));
}

// Number of worker threads, honoring APL_THREADS when set.
int thread_count();

// Fixed-point text for CSV cells; identical across runs and platforms.
std::string format_fixed(double x, int digits = 6);

// Writes to a sibling temporary and renames over `path`.
void write_text_atomic(const std::filesystem::path &path, std::string_view text);

}  // namespace apl

#endif  // APL_COMMON_HPP_
