#include "qkdnet/rng.hpp"

#include "qkdnet/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace qkdnet;

TEST_SUITE_BEGIN("rng");

TEST_CASE("same seed and id give identical streams") {
    RngStream a = derive_stream(42, "A-B");
    RngStream b = derive_stream(42, "A-B");
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("golden first draws") {
    // Frozen at implementation time; any change to the stream derivation
    // breaks report reproducibility and must be deliberate.
    RngStream a = derive_stream(42, "A-B");
    CHECK(a.next_u64() == 6278378815783910084ULL);

    RngStream b = derive_stream(0x123456789ABCDEF0ULL, "beijing");
    CHECK(b.next_u64() == 11044300767032204422ULL);
    CHECK(b.next_double() == doctest::Approx(0.97905259590271154).epsilon(1e-15));
}

TEST_CASE("distinct ids give uncorrelated streams") {
    RngStream a = derive_stream(7, "A-B");
    RngStream b = derive_stream(7, "A-C");
    const int n = 1000000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a.next_double();
        const double y = b.next_double();
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double nn = n;
    const double r =
        (sxy - sx * sy / nn) / std::sqrt((sxx - sx * sx / nn) * (syy - sy * sy / nn));
    // 1/sqrt(n) = 1e-3; allow 3.5 sigma.
    CHECK(std::abs(r) < 3.5e-3);
}

TEST_CASE("next_double stays in [0, 1)") {
    RngStream rng(123);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("next_below is bounded and rejects zero") {
    RngStream rng(9);
    for (int i = 0; i < 10000; ++i) CHECK(rng.next_below(7) < 7);
    CHECK_THROWS_AS(rng.next_below(0), InvalidArgumentError);
}

TEST_CASE("different seeds diverge") {
    RngStream a = derive_stream(1, "x");
    RngStream b = derive_stream(2, "x");
    int equal = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++equal;
    CHECK(equal == 0);
}

TEST_SUITE_END();
