#include <doctest.h>

#include <chrono>
#include <thread>

#include "bridgesim/channel.hpp"

using namespace bridgesim;
using namespace std::chrono_literals;

TEST_SUITE("channel") {
  TEST_CASE("bounded push") {
    Channel<int> c(2);
    CHECK(c.try_push(1));
    CHECK(c.try_push(2));
    CHECK_FALSE(c.try_push(3));
    CHECK(c.size() == 2);
    CHECK(c.try_pop() == 1);
    CHECK(c.try_pop() == 2);
    CHECK_FALSE(c.try_pop());
  }

  TEST_CASE("drop oldest") {
    Channel<int> c(3);
    for (int i = 0; i < 10; ++i) CHECK(c.push_drop_oldest(i));
    CHECK(c.dropped() == 7);
    CHECK(c.try_pop() == 7);
    CHECK(c.try_pop() == 8);
    CHECK(c.try_pop() == 9);
  }

  TEST_CASE("close drains then ends") {
    Channel<int> c(4);
    c.try_push(5);
    c.close();
    CHECK_FALSE(c.try_push(6));
    CHECK_FALSE(c.push_drop_oldest(6));
    CHECK(c.pop() == 5);
    CHECK_FALSE(c.pop());
    CHECK(c.closed());
  }

  TEST_CASE("timed pop") {
    Channel<int> c(1);
    const auto t0 = std::chrono::steady_clock::now();
    CHECK_FALSE(c.pop_for(30ms));
    CHECK(std::chrono::steady_clock::now() - t0 >= 25ms);

    std::thread producer([&] {
      std::this_thread::sleep_for(10ms);
      c.try_push(42);
    });
    CHECK(c.pop_for(5s) == 42);
    producer.join();
  }

  TEST_CASE("capacity zero behaves as one") {
    Channel<int> c(0);
    CHECK(c.try_push(1));
    CHECK_FALSE(c.try_push(2));
  }
}
