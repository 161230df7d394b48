#include "pointsim/simkernel.hpp"

#include <doctest.h>

#include <set>
#include <stdexcept>
#include <vector>

using namespace pointsim::sim;

TEST_CASE("scheduler fires by time, then insertion order")
{
  Scheduler s;
  std::vector<int> order;
  s.schedule(30, [&] { order.push_back(3); });
  s.schedule(10, [&] { order.push_back(1); });
  s.schedule(10, [&] { order.push_back(2); });
  s.schedule(0, [&] { order.push_back(0); });
  s.run_until(100);
  CHECK(order == std::vector<int>{0, 1, 2, 3});
  CHECK(s.now() == 100);
  CHECK(s.executed() == 4);
}

TEST_CASE("events scheduled from a handler at the same instant run after earlier ones")
{
  Scheduler s;
  std::vector<int> order;
  s.schedule(5, [&] {
    order.push_back(1);
    s.schedule(0, [&] { order.push_back(3); });
  });
  s.schedule(5, [&] { order.push_back(2); });
  s.run_until(5);
  CHECK(order == std::vector<int>{1, 2, 3});
}

TEST_CASE("run_until leaves later events pending and parks the clock")
{
  Scheduler s;
  int fired = 0;
  s.schedule(10, [&] { ++fired; });
  s.schedule(20, [&] { ++fired; });
  CHECK(s.run_until(15) == 1);
  CHECK(s.now() == 15);
  CHECK(s.pending() == 1);
  s.schedule(0, [&] { fired += 10; });
  s.run_until(20);
  CHECK(fired == 12);
}

TEST_CASE("cancel")
{
  Scheduler s;
  int fired = 0;
  const auto a = s.schedule(10, [&] { ++fired; });
  const auto b = s.schedule(10, [&] { fired += 100; });
  CHECK(s.cancel(b));
  CHECK_FALSE(s.cancel(b));
  CHECK_FALSE(s.cancel(9999));
  s.run_until(10);
  CHECK(fired == 1);
  CHECK_FALSE(s.cancel(a));
  CHECK(s.pending() == 0);
}

TEST_CASE("negative delays and past absolute times are rejected")
{
  Scheduler s;
  CHECK_THROWS_AS(s.schedule(-1, [] {}), std::invalid_argument);
  s.run_until(50);
  CHECK_THROWS_AS(s.schedule_at(49, [] {}), std::invalid_argument);
}

TEST_CASE("transmission time rounds up")
{
  CHECK(transmission_time(1400, 4'000'000) == 2800);
  CHECK(transmission_time(1, 1'000'000'000) == 1);
  CHECK(transmission_time(125, 1'000'000) == 1000);
}

TEST_CASE("named streams are independent of creation order")
{
  RngStreams a(42);
  RngStreams b(42);
  const auto a1 = a.stream("alpha").next();
  b.stream("beta").next();
  b.stream("gamma").next();
  CHECK(b.stream("alpha").next() == a1);
  CHECK(RngStreams::derive_seed(42, "alpha") != RngStreams::derive_seed(42, "beta"));
  CHECK(RngStreams::derive_seed(42, "alpha") != RngStreams::derive_seed(43, "alpha"));
  RngStreams c(43);
  CHECK(c.stream("alpha").next() != a1);
}

TEST_CASE("bounded draws stay in range and cover it")
{
  RngStream r(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.below(10);
    REQUIRE(v < 10);
    seen.insert(v);
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  CHECK(seen.size() == 10);
}
