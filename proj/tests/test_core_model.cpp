#include "doctest.h"

#include "acoca/core_model.hpp"
#include "support.hpp"

using namespace acoca;

TEST_SUITE("core_model") {
  TEST_CASE("money sums are exact") {
    Money m;
    for (int i = 0; i < 1000; ++i) m += Money::from_double(0.1);
    CHECK(m.micros() == 100'000'000);
    CHECK(m.value() == 100.0);
    CHECK((Money::from_double(1.5) - Money::from_double(2.25)).micros() == -750'000);
  }

  TEST_CASE("valid catalog passes and exposes lookups") {
    const auto cat = validate_catalog(test::small_catalog(3));
    CHECK(cat.attribute("a2").entity_id == "e");
    CHECK(cat.primary_provider("a1").provider_id == "p1");
    CHECK(cat.min_freshness_threshold() == 0.5);
    CHECK(cat.max_rt_max() == 1.5);
  }

  TEST_CASE("dangling provider reference is reported") {
    auto c = test::small_catalog();
    c.attributes["a1"].provider_ids = {"nope"};
    try {
      validate_catalog(c);
      FAIL("expected CatalogError");
    } catch (const CatalogError& e) {
      REQUIRE(e.violations().size() == 1);
      CHECK(e.violations()[0].kind == CatalogViolation::Kind::DanglingReference);
      CHECK(e.violations()[0].id == "nope");
    }
  }

  TEST_CASE("every violation is collected") {
    auto c = test::small_catalog();
    c.providers["p1"].latency_mean = 0;
    c.providers["p2"].availability = 1.5;
    c.slas["s"].freshness_threshold = 1.0;
    c.attributes["a2"].provider_ids.clear();
    const auto v = check_catalog(c);
    CHECK(v.size() == 4);
  }

  TEST_CASE("primary provider is the fastest, ties by id") {
    auto c = test::small_catalog(1);
    c.providers["p0"] = ContextProvider{"p0", 0.5, 0, 1, Money::from_double(1), 1};
    c.providers["p9"] = ContextProvider{"p9", 0.5, 0, 1, Money::from_double(1), 1};
    c.attributes["a1"].provider_ids = {"p9", "p1", "p0"};
    const auto cat = validate_catalog(c);
    CHECK(cat.primary_provider("a1").provider_id == "p0");
  }

  TEST_CASE("effective lifetime respects the sampling interval") {
    auto c = test::small_catalog(1, 1.0, 0.0, 2.0);
    c.providers["p1"].sampling_rate = 0.1;  // one sample per 10 s
    CHECK(validate_catalog(c).effective_lifetime("a1") == 10.0);
    c.providers["p1"].sampling_rate = 10;
    CHECK(validate_catalog(c).effective_lifetime("a1") == 2.0);
  }

  TEST_CASE("freshness decays linearly and clamps") {
    CHECK(freshness_at(0, 10) == 1.0);
    CHECK(freshness_at(2.5, 10) == doctest::Approx(0.75));
    CHECK(freshness_at(20, 10) == 0.0);
    CHECK(freshness_at(1e9, kInfinite) == 1.0);
    CHECK(arrival_freshness(1.0, 4.0) == doctest::Approx(0.75));
    CHECK(arrival_freshness(5.0, 4.0) == 0.0);
  }

  TEST_CASE("residual lifetime") {
    CHECK(is_infinite(residual_lifetime(1.0, 0.5, 1.0)));
    // f_arr = 0.75 from latency 1 on lifetime 4; stays above 0.5 for one more second
    CHECK(residual_lifetime(0.75, 0.5, 1.0) == doctest::Approx(1.0));
    CHECK(residual_lifetime(0.4, 0.5, 1.0) < 0);
  }
}
