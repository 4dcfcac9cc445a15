#ifndef LSCD_COMMON_HPP
#define LSCD_COMMON_HPP

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace lscd {

// Error taxonomy. The CLI maps these onto exit codes 1/2/3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream tags keep independently consumed random streams from colliding
// when they are derived from one user-facing seed.
namespace stream {
inline constexpr std::uint64_t kWindows = 0x57494e44ULL;
inline constexpr std::uint64_t kSubsample = 0x53554253ULL;
inline constexpr std::uint64_t kNegatives = 0x4e454753ULL;
inline constexpr std::uint64_t kInit = 0x494e4954ULL;
inline constexpr std::uint64_t kRandomMatrix = 0x524d4154ULL;
inline constexpr std::uint64_t kInject = 0x494e4a54ULL;
inline constexpr std::uint64_t kShuffle = 0x53484642ULL;
inline constexpr std::uint64_t kDownsample = 0x444f574eULL;
inline constexpr std::uint64_t kSideA = 0x53494445ULL;
inline constexpr std::uint64_t kSideB = 0x73696465ULL;
inline constexpr std::uint64_t kSynth = 0x53594e54ULL;
inline constexpr std::uint64_t kViInit = 0x56494e49ULL;
}  // namespace stream

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ tag) + index);
}

// Deterministic RNG. mt19937_64's output sequence is pinned by the
// standard; the draw helpers below avoid std:: distributions, whose
// results are implementation-defined, so streams are stable everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound), bound > 0. Rejection sampling keeps
  // the draw unbiased.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw NumericError("Rng::below: bound must be positive");
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % bound;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % bound;
  }

  // Uniform real in [0, 1), 53 random mantissa bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// 17 significant digits round-trip any double exactly.
inline std::string format_double(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::string(buf);
}

inline std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r' || line[i] == '\v' ||
                               line[i] == '\f'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && !(line[j] == ' ' || line[j] == '\t' ||
                                line[j] == '\r' || line[j] == '\v' ||
                                line[j] == '\f'))
      ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Writes via a temp file plus rename so readers never observe a partial
// artifact and reruns produce byte-identical files or nothing.
inline void atomic_write_file(const std::filesystem::path& path,
                              std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

}  // namespace lscd

#endif  // LSCD_COMMON_HPP
