#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "postsel/evalues.hpp"
#include "postsel/metrics.hpp"
#include "postsel/regions.hpp"
#include "postsel/rng.hpp"

using namespace postsel;

namespace {

std::vector<double> alpha_grid(int points = 100) {
    std::vector<double> g;
    for (int i = 1; i <= points; ++i) g.push_back(static_cast<double>(i) / (points + 1));
    return g;
}

} // namespace

TEST_CASE("generalized Hoeffding e-CI closed form") {
    hoeffding_batch_spec spec{0.3, 100, 0.0, 1.0};
    const auto region = hoeffding_generalized_eci(spec, 0.05).evaluate(0.05);
    // at alpha = alpha' the tightening factor is 1: half-width sqrt(log(40)/200)
    CHECK(region.lo() == Catch::Approx(0.3 - 0.13581015157406195).epsilon(1e-12));
    CHECK(region.hi() == Catch::Approx(0.3 + 0.13581015157406195).epsilon(1e-12));
    CHECK(region.lo_open());
    CHECK(region.hi_open());

    // never collapses as alpha -> 1: half-width tends to (log2 + L') r / sqrt(8 n L')
    const double lprime = std::log(2.0 / 0.05);
    const double limit_half = (std::log(2.0) + lprime) / std::sqrt(8.0 * 100.0 * lprime);
    const auto near_one = hoeffding_generalized_eci(spec, 0.05).evaluate(1.0 - 1e-12);
    CHECK(0.5 * near_one.width() == Catch::Approx(limit_half).epsilon(1e-9));

    CHECK_THROWS_AS(hoeffding_generalized_eci(spec, 0.05).evaluate(-0.2), invalid_level_error);
    CHECK_THROWS_AS(hoeffding_generalized_eci(spec, 1.5), invalid_level_error);
}

TEST_CASE("plain Hoeffding CI closed form and domain") {
    hoeffding_batch_spec spec{0.0, 100, -1.0, 1.0};
    const auto region = hoeffding_plain_ci(spec).evaluate(0.05);
    CHECK(region.hi() == Catch::Approx(0.2716203031481239).epsilon(1e-12));
    CHECK(region.lo() == Catch::Approx(-0.2716203031481239).epsilon(1e-12));
    CHECK_THROWS_AS(hoeffding_plain_ci(spec).evaluate(2.0), invalid_level_error);
    CHECK(hoeffding_plain_ci(spec).kind() == eci_kind::plain_ci);

    // bad specs
    CHECK_THROWS_AS((hoeffding_batch_spec{0.0, 0, -1.0, 1.0}.validate()), invalid_config_error);
    CHECK_THROWS_AS((hoeffding_batch_spec{2.0, 10, -1.0, 1.0}.validate()), invalid_config_error);
    CHECK_THROWS_AS((hoeffding_batch_spec{0.0, 10, 1.0, -1.0}.validate()), invalid_config_error);
}

TEST_CASE("generalized matches plain at the target level over random specs") {
    rng_stream g(404);
    for (int t = 0; t < 100; ++t) {
        const double lo = g.uniform(-2.0, 0.0);
        const double hi = lo + g.uniform(0.5, 3.0);
        hoeffding_batch_spec spec{g.uniform(lo, hi), 1 + (g.next() % 10000), lo, hi};
        const double ap = g.uniform(0.01, 0.99);
        const auto a = hoeffding_generalized_eci(spec, ap).evaluate(ap);
        const auto b = hoeffding_plain_ci(spec).evaluate(ap);
        const double scale = std::fabs(a.lo()) + std::fabs(a.hi()) + 1.0;
        CHECK(region_equal(a, b, 1e-12 * scale));
    }
}

TEST_CASE("Hoeffding p-value") {
    CHECK(hoeffding_pvalue({0.4, 50, -1.0, 1.0}, 0.4) == 1.0);
    CHECK(hoeffding_pvalue({0.3, 100, -1.0, 1.0}, 0.0) ==
          Catch::Approx(0.022217993076484612).epsilon(1e-12));
    // p <= alpha iff the null mean falls outside the plain CI at alpha
    rng_stream g(8);
    for (int t = 0; t < 400; ++t) {
        hoeffding_batch_spec spec{g.uniform(-0.9, 0.9), 1 + (g.next() % 500), -1.0, 1.0};
        const double alpha = g.uniform(0.01, 0.99);
        const double null_mean = g.uniform(-1.0, 1.0);
        const bool p_small = hoeffding_pvalue(spec, null_mean) <= alpha;
        const bool outside = !hoeffding_plain_ci(spec).evaluate(alpha).covers(null_mean);
        CHECK(p_small == outside);
    }
}

TEST_CASE("batch e-value family inverts to the generalized interval") {
    hoeffding_batch_spec spec{0.2, 250, -1.0, 1.0};
    auto family = hoeffding_batch_evalue(spec, 0.1);
    auto from_roots = eci_from_evalue(family, {-4.0, 4.0, 1e-10, 300, 257});
    auto closed_form = hoeffding_generalized_eci(spec, 0.1);
    for (double alpha : {0.02, 0.1, 0.5, 0.9}) {
        const auto a = from_roots.evaluate(alpha);
        const auto b = closed_form.evaluate(alpha);
        CHECK(a.lo() == Catch::Approx(b.lo()).margin(1e-7));
        CHECK(a.hi() == Catch::Approx(b.hi()).margin(1e-7));
    }
}

TEST_CASE("eci_from_evalue handles degenerate and non-unimodal families") {
    auto zero = eci_from_evalue(evalue_family{[](double) { return 0.0; }}, {-5.0, 5.0});
    for (double alpha : {0.01, 0.3, 0.9})
        CHECK(region_equal(zero.evaluate(alpha), confidence_region::full_space()));
    CHECK(zero.kind() == eci_kind::from_evalue);

    auto huge = eci_from_evalue(evalue_family{[](double) { return 1e9; }}, {-5.0, 5.0});
    CHECK(huge.evaluate(0.5).kind() == region_kind::empty_set);

    auto twodip = eci_from_evalue(
        evalue_family{[](double theta) {
            const double d1 = (theta - 2.0) * (theta - 2.0);
            const double d2 = (theta + 2.0) * (theta + 2.0);
            return 5.0 * std::min(d1, d2) + 0.01;
        }},
        {-5.0, 5.0});
    CHECK_THROWS_AS(twodip.evaluate(0.5), non_unimodal_error);
}

TEST_CASE("universal inference Gaussian e-value") {
    CHECK(ui_evalue_gaussian({0.0, 0.0}, {1.0, 1.0}, 0.0) ==
          Catch::Approx(0.36787944117144233).epsilon(1e-12));
    // alternative mean equal to theta gives the trivial e-value 1
    CHECK(ui_evalue_gaussian({0.4, 0.6}, {0.2, 0.8}, 0.5) == Catch::Approx(1.0));
    CHECK_THROWS_AS(ui_evalue_gaussian({}, {1.0}, 0.0), empty_split_error);
    CHECK_THROWS_AS(ui_evalue_gaussian({1.0}, {}, 0.0), empty_split_error);

    // theta = 0 stays covered at every level: E(0) = 1/e < 1/alpha for all alpha < 1
    auto eci = eci_from_evalue(ui_gaussian_family({0.0, 0.0}, {1.0, 1.0}), {-10.0, 10.0});
    for (double alpha : alpha_grid(20)) CHECK(eci.evaluate(alpha).covers(0.0));
}

TEST_CASE("ui_even_split gives the odd element to the alternative half") {
    const auto [d0, d1] = ui_even_split({1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(d0.size() == 2);
    CHECK(d1.size() == 3);
    CHECK(d0[0] == 1.0);
    CHECK(d1[0] == 3.0);
    CHECK_THROWS_AS(ui_even_split({1.0}), empty_split_error);
}

TEST_CASE("e-process updates and evaluation") {
    auto st = make_eprocess_state(0.0, 1.0, "constant");
    st = cs_update(st, 0.5, 1.0);
    CHECK(st.t == 1);
    CHECK(st.sum_lambda == 1.0);
    CHECK(st.sum_lambda_x == 0.5);
    CHECK(st.sum_lambda_sq == 1.0);

    // grouping of identical (x, lambda) pairs cannot matter: sums are sums
    auto a = cs_update(cs_update(make_eprocess_state(), 0.25, 0.5), 0.75, 0.25);
    auto b = cs_update(cs_update(make_eprocess_state(), 0.75, 0.25), 0.25, 0.5);
    CHECK(a.sum_lambda == b.sum_lambda);
    CHECK(a.sum_lambda_x == b.sum_lambda_x);
    CHECK(a.sum_lambda_sq == b.sum_lambda_sq);

    CHECK_THROWS_AS(cs_update(make_eprocess_state(0.0, 1.0), 2.0, 1.0), out_of_range_error);

    // empty product
    CHECK(cs_evalue(make_eprocess_state(), 0.3, cs_side::plus) == 1.0);
    CHECK(cs_evalue(make_eprocess_state(), 0.3, cs_side::minus) == 1.0);

    // 100 updates at constant lambda = 0.5 with weighted mean equal to theta
    auto run = make_eprocess_state(0.0, 1.0, "constant");
    for (int i = 0; i < 50; ++i) {
        run = cs_update(run, 0.2, 0.5);
        run = cs_update(run, 0.6, 0.5);
    }
    CHECK(cs_evalue(run, 0.4, cs_side::plus) == Catch::Approx(0.04393693362340742).epsilon(1e-12));
    CHECK(cs_evalue(run, 0.4, cs_side::two_sided) ==
          Catch::Approx(0.5 * 0.04393693362340742).epsilon(1e-12));

    const auto interval = cs_interval(run, 0.05);
    CHECK(0.5 * interval.width() == Catch::Approx(0.13627758908227872).epsilon(1e-12));
    CHECK(interval.covers(0.4));
    CHECK(cs_interval(make_eprocess_state(), 0.05).kind() == region_kind::full_space);
    CHECK_THROWS_AS(cs_interval(run, 1.0), invalid_level_error);
}

TEST_CASE("cs_interval inverts the two-sided e-process") {
    rng_stream g(15);
    auto st = make_eprocess_state(0.0, 1.0);
    const double lambda = constant_cs_lambda(0.1, 60);
    for (int i = 0; i < 60; ++i) st = cs_update(st, g.uniform01(), lambda);
    for (double alpha : {0.02, 0.1, 0.4}) {
        const auto region = cs_interval(st, alpha);
        for (double theta : {0.1, 0.3, 0.45, 0.5, 0.55, 0.7, 0.9}) {
            const bool in = region.covers(theta);
            const bool small_e = cs_evalue(st, theta, cs_side::two_sided) < 1.0 / alpha;
            CHECK(in == small_e);
        }
    }
}

TEST_CASE("indicator e-CI thresholds strictly") {
    auto f40 = indicator_eci(40.0, 0.0, 0.0);
    CHECK(f40.evaluate(0.05).kind() == region_kind::null_complement);
    auto f0 = indicator_eci(0.0, 0.0, 0.0);
    for (double alpha : alpha_grid(10))
        CHECK(f0.evaluate(alpha).kind() == region_kind::full_space);
    // strict inequality at the boundary e = 1/alpha
    auto f20 = indicator_eci(20.0, 0.0, 0.0);
    CHECK(f20.evaluate(0.05).kind() == region_kind::full_space);
    CHECK(f20.evaluate(0.05 + 1e-6).kind() == region_kind::null_complement);
}

TEST_CASE("directional e-CI") {
    auto dir = directional_eci(50.0, 1.0 / 50.0);
    const auto neg = dir.evaluate(0.1);
    CHECK(neg.kind() == region_kind::interval);
    CHECK(neg.hi() == 0.0);
    CHECK(std::isinf(neg.lo()));

    auto flat = directional_eci(1.0, 1.0);
    for (double alpha : alpha_grid(10))
        CHECK(flat.evaluate(alpha).kind() == region_kind::full_space);

    // 2/alpha = 5 and e_plus = 4 is not enough
    auto four = directional_eci(4.0, 0.25);
    CHECK(four.evaluate(0.4).kind() == region_kind::full_space);
    CHECK(four.evaluate(0.6).hi() == 0.0);

    auto minus_side = directional_eci(0.02, 50.0);
    const auto pos = minus_side.evaluate(0.1);
    CHECK(pos.lo() == 0.0);
    CHECK(std::isinf(pos.hi()));

    CHECK_THROWS_AS(directional_eci(3.0, 2.0), not_inverse_error);
}

TEST_CASE("constructed families are monotone and continuous from above on grids") {
    const auto grid = alpha_grid(100);
    hoeffding_batch_spec spec{0.1, 150, -1.0, 1.0};
    std::vector<eci_family> families;
    families.push_back(hoeffding_generalized_eci(spec, 0.2));
    families.push_back(hoeffding_plain_ci(spec));
    families.push_back(indicator_eci(25.0, -0.1, 0.1));
    families.push_back(directional_eci(30.0, 1.0 / 30.0));
    families.push_back(eci_from_evalue(ui_gaussian_family({0.1, -0.2, 0.4}, {0.3, 0.5}), {-20.0, 20.0}));
    for (const auto& family : families) {
        CHECK(is_monotone_on_grid(family, grid));
        // continuity from above at grid resolution: C(alpha) equals the union
        // of C(beta) over beta slightly above alpha, so nudging the level up
        // by epsilon may only shave an epsilon-thin boundary layer
        for (double alpha : {0.1, 0.37, 0.8}) {
            const auto at = family.evaluate(alpha);
            const auto above = family.evaluate(alpha + 1e-11);
            CHECK(contains_region(above, at));
            if (at.kind() == region_kind::interval && above.kind() == region_kind::interval) {
                CHECK(at.lo() == Catch::Approx(above.lo()).margin(1e-6));
                CHECK(at.hi() == Catch::Approx(above.hi()).margin(1e-6));
            }
        }
    }
}

TEST_CASE("e-value families are nonnegative with Monte-Carlo mean at most one") {
    // Hoeffding batch e-value at the true mean, uniform data on [0,1]
    auto batch_metric = [](rng_stream& g, std::size_t) {
        const int n = 64;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += g.uniform01();
        hoeffding_batch_spec spec{sum / n, n, 0.0, 1.0};
        return hoeffding_batch_evalue(spec, 0.1).evaluate(0.5);
    };
    const auto batch = monte_carlo(batch_metric, 10000, 31, 2, "hoeffding_batch_evalue");
    CHECK(batch.mean <= 1.0 + 3.0 * batch.std_err);

    // universal inference at the true Gaussian mean
    auto ui_metric = [](rng_stream& g, std::size_t) {
        std::vector<double> data(40);
        for (auto& x : data) x = 0.7 + g.normal();
        const auto [d0, d1] = ui_even_split(data);
        return ui_evalue_gaussian(d0, d1, 0.7);
    };
    const auto ui = monte_carlo(ui_metric, 10000, 57, 2, "ui_gaussian_evalue");
    CHECK(ui.mean <= 1.0 + 3.0 * ui.std_err);
}

TEST_CASE("two-sided e-process obeys optional stopping in Monte Carlo") {
    const double theta_star = 0.5;
    const double lambda = constant_cs_lambda(0.1, 100);
    auto stopped_value = [&](rng_stream& g, std::size_t) {
        auto st = make_eprocess_state(0.0, 1.0);
        // stop when the e-process crosses 2, or at t = 150
        for (int t = 0; t < 150; ++t) {
            st = cs_update(st, g.uniform01(), lambda);
            if (cs_evalue(st, theta_star, cs_side::two_sided) >= 2.0) break;
        }
        return cs_evalue(st, theta_star, cs_side::two_sided);
    };
    const auto ms = monte_carlo(stopped_value, 10000, 91, 2, "cs_threshold_stop");
    CHECK(ms.mean <= 1.0 + 3.0 * ms.std_err);
}

TEST_CASE("confidence sequence covers at a stopping time") {
    const double theta_star = 0.5;
    const double alpha = 0.1;
    const double lambda = constant_cs_lambda(alpha, 80);
    auto covered = [&](rng_stream& g, std::size_t) {
        auto st = make_eprocess_state(0.0, 1.0);
        // data-dependent stop: first time the running weighted mean drifts
        // far from 1/2, else t = 120
        for (int t = 0; t < 120; ++t) {
            st = cs_update(st, g.uniform01(), lambda);
            if (t > 10 && std::fabs(st.sum_lambda_x / st.sum_lambda - 0.5) > 0.08) break;
        }
        return cs_interval(st, alpha).covers(theta_star) ? 1.0 : 0.0;
    };
    const auto ms = monte_carlo(covered, 10000, 133, 2, "cs_coverage");
    CHECK(ms.mean >= 1.0 - alpha - 3.0 * ms.std_err);
}
