#include "pointsim/fid.hpp"

#include "pointsim/hash.hpp"
#include "pointsim/simkernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace pointsim::fid {

const char*
to_string(Mode mode)
{
  return mode == Mode::exact ? "exact" : "bloom";
}

Mode
mode_from_string(const std::string& s)
{
  if (s == "exact") {
    return Mode::exact;
  }
  if (s == "bloom") {
    return Mode::bloom;
  }
  throw std::invalid_argument("unknown fid mode '" + s + "'");
}

void
FidConfig::validate() const
{
  if (k < 1 || k >= m) {
    throw std::invalid_argument("fid config requires 1 <= k < m");
  }
}

Fid::Fid(std::size_t width)
  : width_(width)
  , words_((width + 63) / 64, 0)
{
}

bool
Fid::test(std::size_t bit) const
{
  if (bit >= width_) {
    throw std::out_of_range("Fid::test: bit beyond width");
  }
  return (words_[bit / 64] >> (bit % 64)) & 1U;
}

void
Fid::set(std::size_t bit)
{
  if (bit >= width_) {
    throw std::out_of_range("Fid::set: bit beyond width");
  }
  words_[bit / 64] |= std::uint64_t{1} << (bit % 64);
}

bool
Fid::none() const noexcept
{
  return std::all_of(words_.begin(), words_.end(), [] (std::uint64_t w) { return w == 0; });
}

std::size_t
Fid::popcount() const noexcept
{
  std::size_t n = 0;
  for (auto w : words_) {
    n += static_cast<std::size_t>(std::popcount(w));
  }
  return n;
}

std::vector<std::size_t>
Fid::set_bits() const
{
  std::vector<std::size_t> bits;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    std::uint64_t w = words_[i];
    while (w != 0) {
      bits.push_back(i * 64 + static_cast<std::size_t>(std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return bits;
}

void
Fid::require_same_width(const Fid& other) const
{
  if (width_ != other.width_) {
    throw std::invalid_argument("FID width mismatch");
  }
}

bool
Fid::contains(const Fid& other) const
{
  require_same_width(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & other.words_[i]) != other.words_[i]) {
      return false;
    }
  }
  return true;
}

Fid&
Fid::operator|=(const Fid& other)
{
  require_same_width(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    words_[i] |= other.words_[i];
  }
  return *this;
}

std::string
Fid::to_hex() const
{
  static constexpr char digits[] = "0123456789abcdef";
  const std::size_t nibbles = (width_ + 3) / 4;
  std::string out(nibbles, '0');
  for (std::size_t n = 0; n < nibbles; ++n) {
    const std::size_t bit = n * 4;
    const unsigned v = (words_[bit / 64] >> (bit % 64)) & 0xfU;
    out[nibbles - 1 - n] = digits[v];
  }
  return out;
}

std::uint64_t
Fid::hash() const noexcept
{
  std::uint64_t h = fnv1a64(static_cast<std::uint64_t>(width_), kFnvOffset);
  for (auto w : words_) {
    h = fnv1a64(w, h);
  }
  return h;
}

std::vector<LinkId>
assign_link_ids(std::size_t link_count, const FidConfig& config, std::uint64_t seed)
{
  config.validate();
  std::vector<LinkId> ids;
  ids.reserve(link_count);
  if (config.mode == Mode::exact) {
    if (link_count > config.m) {
      throw CapacityError("exact FID mode needs m >= number of directed links (" +
                          std::to_string(link_count) + " > " + std::to_string(config.m) + ")");
    }
    for (std::size_t i = 0; i < link_count; ++i) {
      Fid bits(config.m);
      bits.set(i);
      ids.push_back({std::move(bits), i});
    }
    return ids;
  }

  sim::RngStreams streams(seed);
  auto& rng = streams.stream("fid.link_ids");
  for (std::size_t i = 0; i < link_count; ++i) {
    Fid bits(config.m);
    while (bits.popcount() < config.k) {
      bits.set(static_cast<std::size_t>(rng.below(config.m)));
    }
    ids.push_back({std::move(bits), i});
  }
  return ids;
}

Fid
encode_path(std::size_t width, std::span<const LinkId> ids)
{
  Fid out(width);
  for (const auto& id : ids) {
    out |= id.bits;
  }
  return out;
}

bool
should_forward(const Fid& fid, const LinkId& lid)
{
  return fid.contains(lid.bits);
}

Fid
combine_trees(std::size_t width, std::span<const Fid> fids)
{
  Fid out(width);
  for (const auto& f : fids) {
    out |= f;
  }
  return out;
}

double
false_positive_rate(std::size_t m, std::size_t k, std::size_t n_links_encoded)
{
  if (m == 0 || k == 0) {
    throw std::invalid_argument("false_positive_rate: m and k must be >= 1");
  }
  if (n_links_encoded == 0) {
    return 0.0;
  }
  const double kn = static_cast<double>(k) * static_cast<double>(n_links_encoded);
  const double fill = 1.0 - std::pow(1.0 - 1.0 / static_cast<double>(m), kn);
  return std::pow(fill, static_cast<double>(k));
}

} // namespace pointsim::fid
