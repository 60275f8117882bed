#pragma once

#include <cstdint>
#include <string_view>

namespace netkoop {

/// Counter-based stream keyed by (seed, name, index). Two streams with
/// different names or indices are independent, so per-node or per-sample
/// draws do not depend on the order in which they are consumed.
///
/// The distributions are implemented here rather than with <random> so that
/// the same seed yields the same numbers with every standard library.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

  RandomStream child(std::string_view name, std::uint64_t index = 0) const;

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  int uniform_int(int lo, int hi);       // inclusive bounds
  bool bernoulli(double p);
  double normal();  // standard normal, Box-Muller

 private:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t fnv1a64(std::string_view s);

}  // namespace netkoop
