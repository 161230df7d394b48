#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pointsim::fid {

enum class Mode { exact, bloom };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& s);

struct FidConfig {
  std::size_t m = 256;
  std::size_t k = 5;
  Mode mode = Mode::bloom;

  /// Throws std::invalid_argument unless 1 <= k < m.
  void validate() const;
};

/// Fixed-width bit vector. Used both for link identifiers and for the
/// forwarding identifiers carried in packet headers.
class Fid {
 public:
  Fid() = default;
  explicit Fid(std::size_t width);

  std::size_t width() const noexcept { return width_; }
  bool test(std::size_t bit) const;
  void set(std::size_t bit);
  bool none() const noexcept;
  std::size_t popcount() const noexcept;
  std::vector<std::size_t> set_bits() const;

  /// (*this AND other) == other
  bool contains(const Fid& other) const;

  Fid& operator|=(const Fid& other);
  friend Fid operator|(Fid a, const Fid& b) { return a |= b; }
  friend bool operator==(const Fid&, const Fid&) = default;

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::string to_hex() const;
  std::uint64_t hash() const noexcept;

 private:
  void require_same_width(const Fid& other) const;

  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

struct LinkId {
  Fid bits;
  std::size_t link_index = 0;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact mode: link i gets bit i (throws CapacityError when link_count > m).
/// Bloom mode: k distinct bit positions per link from the seeded RNG.
std::vector<LinkId> assign_link_ids(std::size_t link_count, const FidConfig& config,
                                    std::uint64_t seed);

/// Bitwise OR of the ids. An empty path yields the all-zero FID of `width`.
/// Throws std::invalid_argument on mixed widths.
Fid encode_path(std::size_t width, std::span<const LinkId> ids);

/// True iff (fid AND lid) == lid.
bool should_forward(const Fid& fid, const LinkId& lid);

Fid combine_trees(std::size_t width, std::span<const Fid> fids);

/// Analytic Bloom false-positive probability (1-(1-1/m)^{kn})^k.
double false_positive_rate(std::size_t m, std::size_t k, std::size_t n_links_encoded);

} // namespace pointsim::fid
