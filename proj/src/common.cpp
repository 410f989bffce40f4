#include "apl/common.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <omp.h>

namespace apl {

int thread_count() {
  int n = omp_get_max_threads();
  if (const char *env = std::getenv("APL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

std::string format_fixed(double x, int digits) {
  if (x == 0.0) x = 0.0;  // no "-0.000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos) s = s.substr(s[0] == '-');
  return s;
}

void write_text_atomic(const std::filesystem::path &path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIoError, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorKind::kIoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kCapacityExceeded: return "capacity-exceeded";
    case ErrorKind::kInvalidState: return "invalid-state";
    case ErrorKind::kTrainingDiverged: return "training-diverged";
    case ErrorKind::kDegenerateScene: return "degenerate-scene";
    case ErrorKind::kNoDetection: return "no-detection";
    case ErrorKind::kConfigError: return "config-error";
    case ErrorKind::kMissingArtifact: return "missing-artifact";
    case ErrorKind::kIoError: return "io-error";
  }
  return "error";
}

}  // namespace apl
