#include "ts2img/rng.hpp"
#include "ts2img/tensor.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace ts2img;

TEST_CASE("tensor shape bookkeeping") {
    Tensor<float> t({2, 3, 4});
    CHECK(t.size() == 24);
    CHECK(t.rank() == 3);
    CHECK(t.dim(1) == 3);
    CHECK((t.data == 0.0f).all());

    CHECK(t.offset({1, 2, 3}) == 23);
    CHECK(t.offset({0, 0, 0}) == 0);
    t.at({1, 0, 2}) = 7.0f;
    CHECK(t.data[1 * 12 + 2] == 7.0f);

    CHECK_THROWS_AS(t.offset({2, 0, 0}), std::out_of_range);
    CHECK_THROWS_AS(t.offset({0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor<float>({2, 0, 4}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor<float>({-1}), std::invalid_argument);
}

TEST_CASE("tensor factories and grad buffer") {
    auto t = Tensor<double>::full({2, 2}, 3.5);
    CHECK(t.data.sum() == doctest::Approx(14.0));

    auto u = Tensor<float>::from({3}, {1.0f, 2.0f, 3.0f});
    CHECK(u.at({2}) == 3.0f);
    CHECK_THROWS_AS(Tensor<float>::from({2}, {1.0f}), std::invalid_argument);

    CHECK_FALSE(u.has_grad());
    u.alloc_grad();
    CHECK(u.has_grad());
    CHECK(u.grad.size() == 3);
    u.grad[0] = 5.0f;
    u.zero_grad();
    CHECK(u.grad[0] == 0.0f);

    auto d = u.template cast<double>();
    CHECK(d.at({1}) == 2.0);
}

TEST_CASE("ensure_finite flags bad values") {
    auto t = Tensor<float>::full({2}, 1.0f);
    CHECK_NOTHROW(ensure_finite(t, "here"));
    t.data[1] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(ensure_finite(t, "here"), std::runtime_error);
    t.data[1] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(ensure_finite(t, "here"), std::runtime_error);
}

TEST_CASE("counter rng is deterministic and key-sensitive") {
    CounterRng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    bool differs = false;
    CounterRng a2(42);
    for (int i = 0; i < 100; ++i) differs |= (a2.next_u64() != c.next_u64());
    CHECK(differs);

    // keyed(...) must separate streams that share a seed.
    auto s1 = CounterRng::keyed({7, 0});
    auto s2 = CounterRng::keyed({7, 1});
    bool stream_differs = false;
    for (int i = 0; i < 100; ++i) stream_differs |= (s1.next_u64() != s2.next_u64());
    CHECK(stream_differs);
}

TEST_CASE("rng doubles cover [0,1) uniformly enough") {
    CounterRng rng(123);
    double sum = 0.0, mn = 1.0, mx = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        mn = std::min(mn, u);
        mx = std::max(mx, u);
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(mn < 0.001);
    CHECK(mx > 0.999);
}

TEST_CASE("rng next_below is unbiased across small moduli") {
    CounterRng rng(9);
    std::vector<int> counts(10, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[rng.next_below(10)];
    for (int c : counts) CHECK(std::abs(c - n / 10) < 500);
}

TEST_CASE("rng normals match the standard moments") {
    CounterRng rng(2024);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng.next_normal();
        sum += z;
        sum2 += z * z;
        sum3 += z * z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sum3 / n == doctest::Approx(0.0).epsilon(0.05));
}

TEST_CASE("random_permutation is a permutation and seed-stable") {
    CounterRng rng(5);
    auto p = random_permutation(20, rng);
    std::set<int> seen(p.begin(), p.end());
    CHECK(seen.size() == 20);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 19);

    CounterRng rng2(5);
    CHECK(random_permutation(20, rng2) == p);

    CounterRng rng3(6);
    CHECK(random_permutation(20, rng3) != p);
}
