#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "rotmap/checks.hpp"
#include "rotmap/mappings.hpp"

using namespace rotmap;

namespace {

// The module tests already hammer the underlying properties at full sample
// counts; here moderate counts keep the suite quick while still exercising
// every code path of the check runners.
std::vector<checks::CheckResult> run_all_suites(std::uint64_t seed) {
    std::vector<checks::CheckResult> all;
    for (const checks::CheckResult& r : checks::gradcheck(seed, 40)) all.push_back(r);
    for (const checks::CheckResult& r : checks::rankcheck(seed, 60)) all.push_back(r);
    for (const checks::CheckResult& r : checks::convexity(seed, 25)) all.push_back(r);
    for (const checks::CheckResult& r : checks::identities(seed, 400)) all.push_back(r);
    for (const checks::CheckResult& r : checks::gs_limit(seed, 25)) all.push_back(r);
    return all;
}

}  // namespace

TEST_CASE("every suite passes at moderate sample counts") {
    const std::vector<checks::CheckResult> all = run_all_suites(0);
    for (const checks::CheckResult& r : all) {
        CAPTURE(r.name);
        CAPTURE(r.detail);
        CHECK(r.passed);
        CHECK(!r.detail.empty());
        CHECK(!r.anchor.empty());
    }
    CHECK(checks::all_passed(all));
}

TEST_CASE("the catalog lists exactly the checks the suites emit, in order") {
    const std::vector<checks::CheckInfo> catalog = checks::list_checks();
    const std::vector<checks::CheckResult> all = run_all_suites(1);
    REQUIRE(catalog.size() == all.size());
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        CHECK(catalog[i].name == all[i].name);
        CHECK(catalog[i].anchor == all[i].anchor);
        CHECK(!catalog[i].summary.empty());
    }
    std::set<std::string> names;
    for (const checks::CheckInfo& info : catalog) names.insert(info.name);
    CHECK(names.size() == catalog.size());
}

TEST_CASE("single-mapping gradcheck runs just that mapping") {
    const auto only = checks::gradcheck(3, 50, map::MappingSpec::of(map::Kind::Procrustes));
    REQUIRE(only.size() == 1);
    CHECK(only[0].name == "gradcheck/procrustes");
    CHECK(only[0].passed);
}

TEST_CASE("results are deterministic in the seed") {
    const auto a = checks::identities(7, 500);
    const auto b = checks::identities(7, 500);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].detail == b[i].detail);
        CHECK(a[i].passed == b[i].passed);
    }
    const auto c = checks::identities(8, 500);
    bool any_differs = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (c[i].detail != a[i].detail) any_differs = true;
    CHECK(any_differs);
}

TEST_CASE("all_passed notices a failure") {
    std::vector<checks::CheckResult> rs = {{"x", "m", true, ""}, {"y", "m", false, ""}};
    CHECK(!checks::all_passed(rs));
    rs.pop_back();
    CHECK(checks::all_passed(rs));
}
