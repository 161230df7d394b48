#include "pointsim/fid.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

using namespace pointsim::fid;

TEST_CASE("bit vector basics")
{
  Fid f(130);
  CHECK(f.none());
  f.set(0);
  f.set(64);
  f.set(129);
  CHECK(f.popcount() == 3);
  CHECK(f.test(64));
  CHECK_FALSE(f.test(65));
  CHECK(f.set_bits() == std::vector<std::size_t>{0, 64, 129});
  CHECK_THROWS(f.set(130));
  CHECK_THROWS(f.test(130));
  Fid g(130);
  g.set(64);
  CHECK(f.contains(g));
  CHECK_FALSE(g.contains(f));
  CHECK_THROWS(f |= Fid(64));
}

TEST_CASE("exact mode gives link i bit i and enforces capacity")
{
  const auto ids = assign_link_ids(10, FidConfig{16, 1, Mode::exact}, 1);
  REQUIRE(ids.size() == 10);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    CHECK(ids[i].link_index == i);
    CHECK(ids[i].bits.set_bits() == std::vector<std::size_t>{i});
  }
  CHECK_THROWS_AS(assign_link_ids(17, FidConfig{16, 1, Mode::exact}, 1), CapacityError);
}

TEST_CASE("bloom ids have k distinct bits and depend only on the seed")
{
  const FidConfig cfg{64, 3, Mode::bloom};
  const auto a = assign_link_ids(50, cfg, 9);
  const auto b = assign_link_ids(50, cfg, 9);
  const auto c = assign_link_ids(50, cfg, 10);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].bits.popcount() == 3);
    CHECK(a[i].bits == b[i].bits);
    differs = differs || !(a[i].bits == c[i].bits);
  }
  CHECK(differs);
}

TEST_CASE("config validation")
{
  CHECK_NOTHROW(FidConfig{256, 5, Mode::bloom}.validate());
  CHECK_THROWS_AS((FidConfig{8, 8, Mode::bloom}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FidConfig{8, 0, Mode::bloom}.validate()), std::invalid_argument);
  CHECK(mode_from_string("exact") == Mode::exact);
  CHECK_THROWS(mode_from_string("fuzzy"));
}

TEST_CASE("encoding is the OR of link ids and forwarding is the AND test")
{
  const auto ids = assign_link_ids(40, FidConfig{64, 3, Mode::bloom}, 3);
  const std::vector<LinkId> path{ids[1], ids[7], ids[30]};
  const Fid f = encode_path(64, path);
  Fid manual(64);
  for (const auto& l : path) {
    for (auto bit : l.bits.set_bits()) {
      manual.set(bit);
    }
  }
  CHECK(f == manual);
  for (const auto& l : path) {
    CHECK(should_forward(f, l));
  }
  for (const auto& l : ids) {
    CHECK(should_forward(f, l) == manual.contains(l.bits));
  }
  CHECK(encode_path(64, {}).none());
  const std::vector<Fid> trees{encode_path(64, std::vector<LinkId>{ids[2]}),
                               encode_path(64, std::vector<LinkId>{ids[3]})};
  CHECK(combine_trees(64, trees) == (trees[0] | trees[1]));
}

TEST_CASE("analytic false positive rate")
{
  const double expect = std::pow(1.0 - std::pow(1.0 - 1.0 / 64.0, 30.0), 3.0);
  CHECK(false_positive_rate(64, 3, 10) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(false_positive_rate(64, 3, 0) == 0.0);
}

TEST_CASE("bloom: encoded links always pass")
{
  std::mt19937_64 rng(5);
  const auto ids = assign_link_ids(300, FidConfig{64, 3, Mode::bloom}, 77);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<LinkId> chosen;
    for (int i = 0; i < 10; ++i) {
      chosen.push_back(ids[rng() % ids.size()]);
    }
    const Fid f = encode_path(64, chosen);
    for (const auto& l : chosen) {
      REQUIRE(should_forward(f, l));
    }
  }
}
