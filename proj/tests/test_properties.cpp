#include <catch2/catch_amalgamated.hpp>

#include "property_suites.hpp"

using namespace diffpass;

TEST_CASE("variational dynamics are linear in the variation", "[property]") {
    const props::SuiteResult r = props::linearity_suite();
    INFO(r.first_failure);
    CHECK(r.cases >= 100);
    CHECK(r.failures == 0);
}

TEST_CASE("margins and residuals scale linearly with the storage", "[property]") {
    const props::SuiteResult r = props::scale_invariance_suite();
    INFO(r.first_failure);
    CHECK(r.cases >= 100);
    CHECK(r.failures == 0);
}

TEST_CASE("storage rate agrees with finite differences along rays", "[property]") {
    const props::SuiteResult r = props::chain_rule_suite();
    INFO(r.first_failure);
    CHECK(r.cases >= 100);
    CHECK(r.failures == 0);
}

TEST_CASE("signal expressions survive print-parse round trips", "[property]") {
    const props::SuiteResult r = props::roundtrip_suite();
    INFO(r.first_failure);
    CHECK(r.cases >= 100);
    CHECK(r.failures == 0);
}
