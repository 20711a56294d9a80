#include <catch2/catch_amalgamated.hpp>

#include "postsel/regions.hpp"
#include "postsel/rng.hpp"
#include "postsel/serialize.hpp"

#include "oracles.hpp"

using namespace postsel;

TEST_CASE("covers handles every variant and endpoint openness") {
    CHECK(confidence_region::full_space().covers(3.7));
    CHECK_FALSE(confidence_region::empty_set().covers(0.0));

    const auto closed = confidence_region::interval(-1.0, 1.0, false, false);
    CHECK(closed.covers(1.0));
    CHECK_FALSE(closed.covers(1.0 + 1e-12));
    CHECK(closed.covers(-1.0));

    const auto open = confidence_region::interval(-1.0, 1.0, true, true);
    CHECK_FALSE(open.covers(1.0));
    CHECK_FALSE(open.covers(-1.0));
    CHECK(open.covers(0.999999));

    CHECK_FALSE(confidence_region::null_complement(0.0, 0.0).covers(0.0));
    CHECK(confidence_region::null_complement(0.0, 0.0).covers(0.5));
    CHECK(confidence_region::null_complement(-1.0, 1.0).covers(-1.5));
    CHECK_FALSE(confidence_region::null_complement(-1.0, 1.0).covers(1.0));

    const auto half = confidence_region::half_line_above(2.0, true);
    CHECK(half.covers(2.5));
    CHECK_FALSE(half.covers(2.0));
    CHECK(confidence_region::half_line_above(2.0, false).covers(2.0));
}

TEST_CASE("width is Lebesgue length") {
    CHECK(width(confidence_region::interval(0.0, 0.3)) == Catch::Approx(0.3));
    CHECK(width(confidence_region::empty_set()) == 0.0);
    CHECK(std::isinf(width(confidence_region::half_line_above(2.0))));
    CHECK(std::isinf(width(confidence_region::full_space())));
    CHECK(std::isinf(width(confidence_region::null_complement(0.0, 1.0))));
    CHECK(width(confidence_region::interval(1.0, 1.0, false, false)) == 0.0);
}

TEST_CASE("construction rejects NaN and inverted endpoints") {
    const double nan = std::nan("");
    CHECK_THROWS_AS(confidence_region::interval(nan, 1.0), invalid_region_error);
    CHECK_THROWS_AS(confidence_region::interval(0.0, nan), invalid_region_error);
    CHECK_THROWS_AS(confidence_region::interval(1.0, 0.0), invalid_region_error);
    CHECK_THROWS_AS(confidence_region::interval(1.0, 1.0, true, false), invalid_region_error);
    CHECK_THROWS_AS(confidence_region::null_complement(1.0, 0.0), invalid_region_error);
    CHECK_THROWS_AS(confidence_region::half_line_above(nan), invalid_region_error);
}

TEST_CASE("contains_region basics") {
    CHECK(contains_region(confidence_region::interval(0, 1), confidence_region::interval(-1, 2)));
    CHECK_FALSE(
        contains_region(confidence_region::full_space(), confidence_region::interval(0, 1)));
    CHECK(contains_region(confidence_region::empty_set(), confidence_region::interval(0, 1)));
    CHECK(contains_region(confidence_region::empty_set(), confidence_region::empty_set()));
    // openness at shared endpoints
    CHECK(contains_region(confidence_region::interval(0, 1, true, true),
                          confidence_region::interval(0, 1, false, false)));
    CHECK_FALSE(contains_region(confidence_region::interval(0, 1, false, false),
                                confidence_region::interval(0, 1, true, true)));
    // an unbounded interval is the full space as a point set
    CHECK(contains_region(confidence_region::full_space(),
                          confidence_region::interval(neg_inf, pos_inf)));
    CHECK(region_equal(confidence_region::interval(neg_inf, pos_inf),
                       confidence_region::full_space()));
    // null complement pieces
    CHECK(contains_region(confidence_region::interval(2.0, 3.0),
                          confidence_region::null_complement(0.0, 1.0)));
    CHECK_FALSE(contains_region(confidence_region::interval(0.5, 3.0),
                                confidence_region::null_complement(0.0, 1.0)));
    CHECK(contains_region(confidence_region::null_complement(0.0, 1.0),
                          confidence_region::null_complement(0.25, 0.75)));
    CHECK_FALSE(contains_region(confidence_region::null_complement(0.25, 0.75),
                                confidence_region::null_complement(0.0, 1.0)));
}

namespace {

confidence_region random_region(rng_stream& g) {
    const double a = g.uniform(-3.0, 3.0);
    const double b = a + g.uniform(0.0, 3.0);
    switch (g.next() % 5) {
    case 0: return confidence_region::interval(a, b, g.bernoulli(0.5), g.bernoulli(0.5));
    case 1: return confidence_region::half_line_above(a, g.bernoulli(0.5));
    case 2: return confidence_region::full_space();
    case 3: return confidence_region::empty_set();
    default: return confidence_region::null_complement(a, b);
    }
}

} // namespace

TEST_CASE("contains_region agrees with a witness oracle on random pairs") {
    rng_stream g(2024);
    for (int t = 0; t < 2000; ++t) {
        confidence_region inner = random_region(g);
        confidence_region outer = random_region(g);
        if (inner.kind() == region_kind::interval && inner.lo() == inner.hi()) continue;
        INFO("trial " << t);
        CHECK(contains_region(inner, outer) == oracles::contains_by_witness(inner, outer));
    }
}

TEST_CASE("covers is consistent with contains_region") {
    rng_stream g(77);
    for (int t = 0; t < 500; ++t) {
        confidence_region inner = random_region(g);
        confidence_region outer = random_region(g);
        if (!contains_region(inner, outer)) continue;
        for (int s = 0; s < 32; ++s) {
            const double theta = g.uniform(-5.0, 5.0);
            if (inner.covers(theta)) CHECK(outer.covers(theta));
        }
    }
}

TEST_CASE("region JSON uses inf strings") {
    const auto j = region_to_json(confidence_region::interval(neg_inf, 0.5));
    CHECK(j["kind"] == "interval");
    CHECK(j["lo"] == "-inf");
    CHECK(j["hi"] == 0.5);
    CHECK(region_to_json(confidence_region::full_space())["lo"] == "-inf");
    CHECK(region_to_json(confidence_region::half_line_above(2.0))["hi"] == "inf");
    const auto nc = region_to_json(confidence_region::null_complement(-1.0, 1.0));
    CHECK(nc["kind"] == "null_complement");
    CHECK(nc["lo"] == -1.0);
    CHECK(nc["hi"] == 1.0);
}

TEST_CASE("eci_family rejects levels outside [0,1)") {
    eci_family fam([](double) { return confidence_region::full_space(); }, eci_kind::from_evalue);
    CHECK_THROWS_AS(fam.evaluate(1.0), invalid_level_error);
    CHECK_THROWS_AS(fam.evaluate(2.0), invalid_level_error);
    CHECK_THROWS_AS(fam.evaluate(-0.1), invalid_level_error);
    CHECK(fam.evaluate(0.0).kind() == region_kind::full_space);
}

TEST_CASE("is_monotone_on_grid notices a violation") {
    eci_family good(
        [](double alpha) {
            return confidence_region::interval(-1.0 / (alpha + 0.01), 1.0 / (alpha + 0.01));
        },
        eci_kind::from_evalue);
    eci_family bad(
        [](double alpha) {
            const double h = alpha < 0.5 ? 1.0 : 2.0;  // grows with alpha: not a CI family
            return confidence_region::interval(-h, h);
        },
        eci_kind::from_evalue);
    std::vector<double> grid;
    for (int i = 1; i < 50; ++i) grid.push_back(i / 50.0);
    CHECK(is_monotone_on_grid(good, grid));
    CHECK_FALSE(is_monotone_on_grid(bad, grid));
}
