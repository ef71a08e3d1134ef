#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "invm/errors.hpp"
#include "invm/tuning.hpp"

using namespace invm;

namespace {

const Polynomial kCubic = Polynomial::parse("-1,0,0,1");

LyapunovProfile profile_of(const std::vector<double>& lambda1s) {
    LyapunovProfile p;
    int t = 10;
    for (double l : lambda1s) {
        SlopeFit f;
        f.lambda1 = l;
        p.entries.push_back({t++, f});
    }
    return p;
}

ComplexVec near_cube_roots(double dist) {
    const double a = 2.0 * std::numbers::pi / 3.0;
    ComplexVec x{Complex(1.0), Complex(std::cos(a), std::sin(a)),
                 Complex(std::cos(a), -std::sin(a))};
    for (auto& xi : x)
        xi += Complex(dist, 0.0);
    return x;
}

} // namespace

TEST_CASE("profile_features on simple profiles") {
    const SelectionCriteria crit;

    const ProfileFeatures all_neg = profile_features(profile_of({-1, -1, -1, -1}), crit);
    CHECK(all_neg.negative_fraction == 1.0);
    CHECK(all_neg.transient_end_index == 0);
    CHECK(all_neg.max_excursion == 0.0);
    CHECK(all_neg.mean_late_lambda1 == -1.0);

    const ProfileFeatures all_pos = profile_features(profile_of({1, 1, 1, 1}), crit);
    CHECK(all_pos.negative_fraction == 0.0);
    CHECK(all_pos.transient_end_index == 4);
    CHECK(all_pos.max_excursion == 1.0);

    const ProfileFeatures mixed = profile_features(profile_of({0.2, -0.1, -0.3, -0.3}), crit);
    CHECK(mixed.negative_fraction == 0.75);
    CHECK(mixed.transient_end_index == 1);
    CHECK(mixed.max_excursion == doctest::Approx(0.2));
    CHECK(mixed.mean_late_lambda1 == doctest::Approx(-0.3));
}

TEST_CASE("exact zeros count as the contractive floor") {
    const ProfileFeatures f = profile_features(profile_of({-0.5, 0.0, 0.0, 0.0}), SelectionCriteria{});
    CHECK(f.negative_fraction == 1.0);
    CHECK(f.transient_end_index == 0);
    CHECK(f.max_excursion == 0.0);
}

TEST_CASE("classify_alpha on the boundary") {
    const SelectionCriteria crit;
    CHECK(classify_alpha(profile_features(profile_of({-1, -1, -1, -1}), crit), crit) ==
          AlphaClass::well_behaved);
    CHECK(classify_alpha(profile_features(profile_of({1, 1, 1, 1}), crit), crit) ==
          AlphaClass::poor);
    // negative_fraction 0.75 < 0.8 threshold: strictly rejected
    CHECK(classify_alpha(profile_features(profile_of({0.2, -0.1, -0.3, -0.3}), crit), crit) ==
          AlphaClass::poor);
}

TEST_CASE("classify_alpha is monotone in each feature") {
    const SelectionCriteria crit;
    ProfileFeatures f;
    f.profile_length = 40;
    f.negative_fraction = 0.85;
    f.transient_end_index = 10;
    f.max_excursion = 0.4;
    REQUIRE(classify_alpha(f, crit) == AlphaClass::well_behaved);

    ProfileFeatures better = f;
    better.negative_fraction = 0.95;
    CHECK(classify_alpha(better, crit) == AlphaClass::well_behaved);
    better = f;
    better.transient_end_index = 2;
    CHECK(classify_alpha(better, crit) == AlphaClass::well_behaved);
    better = f;
    better.max_excursion = 0.1;
    CHECK(classify_alpha(better, crit) == AlphaClass::well_behaved);
}

TEST_CASE("negating a zero-free profile mirrors negative_fraction") {
    const std::vector<double> l1{0.4, -0.2, -0.6, 0.1, -0.9};
    const ProfileFeatures f = profile_features(profile_of(l1), SelectionCriteria{});
    std::vector<double> neg;
    for (double v : l1)
        neg.push_back(-v);
    const ProfileFeatures g = profile_features(profile_of(neg), SelectionCriteria{});
    CHECK(f.negative_fraction == doctest::Approx(1.0 - g.negative_fraction));
}

TEST_CASE("select_alpha basic contracts") {
    const SelectionCriteria crit;
    const LyapunovProfile good = profile_of(std::vector<double>(10, -1.0));
    const LyapunovProfile bad = profile_of(std::vector<double>(10, 1.0));

    // single well-behaved candidate
    const TuningReport single = select_alpha({{2.0, {good}}}, crit);
    CHECK(single.selected_alpha == 2.0);
    CHECK(!single.fallback);
    CHECK(single.per_alpha.size() == 1);
    CHECK(single.per_alpha[0].classification == AlphaClass::well_behaved);

    // poor alpha=0 against well-behaved alpha=3
    const TuningReport pair = select_alpha({{0.0, {bad}}, {3.0, {good}}}, crit);
    CHECK(pair.selected_alpha == 3.0);
    CHECK(!pair.fallback);

    // stronger late contraction wins
    LyapunovProfile mild = profile_of(std::vector<double>(10, -1.0));
    LyapunovProfile strong = profile_of(std::vector<double>(10, -2.0));
    const TuningReport ranked = select_alpha({{1.0, {mild}}, {4.0, {strong}}}, crit);
    CHECK(ranked.selected_alpha == 4.0);
}

TEST_CASE("select_alpha falls back when nothing is well behaved") {
    const SelectionCriteria crit;
    const LyapunovProfile poor1 = profile_of({1, 1, 1, 1, -1, -1});      // 2/6 contractive
    const LyapunovProfile poor2 = profile_of({1, 1, 1, 1, 1, -1});       // 1/6
    const TuningReport rep = select_alpha({{0.0, {poor1}}, {1.0, {poor2}}}, crit);
    CHECK(rep.fallback);
    CHECK(rep.selected_alpha == 0.0); // larger negative fraction
}

TEST_CASE("select_alpha is order-independent up to the documented tie-break") {
    const SelectionCriteria crit;
    const LyapunovProfile good = profile_of(std::vector<double>(10, -1.0));
    const LyapunovProfile better = profile_of(std::vector<double>(10, -3.0));
    const TuningReport ab = select_alpha({{1.0, {good}}, {2.0, {better}}}, crit);
    const TuningReport ba = select_alpha({{2.0, {better}}, {1.0, {good}}}, crit);
    CHECK(ab.selected_alpha == ba.selected_alpha);

    // exact tie: smaller alpha wins regardless of order
    const TuningReport t1 = select_alpha({{5.0, {good}}, {2.0, {good}}}, crit);
    const TuningReport t2 = select_alpha({{2.0, {good}}, {5.0, {good}}}, crit);
    CHECK(t1.selected_alpha == 2.0);
    CHECK(t2.selected_alpha == 2.0);
}

TEST_CASE("an alpha must be well behaved on every profile") {
    const SelectionCriteria crit;
    const LyapunovProfile good = profile_of(std::vector<double>(10, -1.0));
    const LyapunovProfile bad = profile_of(std::vector<double>(10, 1.0));
    const TuningReport rep = select_alpha({{3.0, {good, bad}}, {1.0, {good, good}}}, crit);
    CHECK(rep.per_alpha[0].classification == AlphaClass::poor);
    CHECK(rep.selected_alpha == 1.0);
}

TEST_CASE("select_alpha rejects empty input") {
    CHECK_THROWS_AS(select_alpha({}, SelectionCriteria{}), insufficient_data_error);
}

TEST_CASE("criteria validation") {
    SelectionCriteria c;
    c.min_negative_fraction = 1.01;
    CHECK_THROWS_AS(c.validate(), domain_error);
    c = SelectionCriteria{};
    c.max_transient_fraction = 0.0;
    CHECK_THROWS_AS(c.validate(), domain_error);
    c = SelectionCriteria{};
    c.max_positive_excursion = -1.0;
    CHECK_THROWS_AS(c.validate(), domain_error);
}

TEST_CASE("tuning report serializes to json") {
    const SelectionCriteria crit;
    const TuningReport rep =
        select_alpha({{0.0, {profile_of({1, 1, 1, 1})}}, {3.0, {profile_of({-1, -1, -1, -1})}}}, crit);
    const std::string body = tuning_report_json(rep);
    CHECK(body.find("\"selected_alpha\": 3.0") != std::string::npos);
    CHECK(body.find("\"classification\": \"poor\"") != std::string::npos);
    CHECK(body.find("\"classification\": \"well_behaved\"") != std::string::npos);
}

TEST_CASE("least_squares_slope signs") {
    const double down[] = {-1.0, -2.0, -3.0};
    CHECK(least_squares_slope(down) == doctest::Approx(-1.0).epsilon(1e-14));
    const double up[] = {0.0, 0.5, 1.2, 1.9};
    CHECK(least_squares_slope(up) > 0.0);
    const double flat[] = {2.0, 2.0, 2.0};
    CHECK(least_squares_slope(flat) == 0.0);
}

TEST_CASE("adaptive_solve with one candidate equals run_solver") {
    SolverParams p;
    p.alpha = 3.0;
    p.max_iters = 60;
    for (double dist : {0.01, 0.4}) {
        const ComplexVec x0 = near_cube_roots(dist);
        const double cands[] = {3.0};
        const AdaptiveResult a = adaptive_solve(kCubic, x0, p, cands);
        const SolverTrace r = run_solver(kCubic, x0, p, Method::INVM);
        CHECK(a.trace.status == r.status);
        CHECK(a.trace.iterations_used == r.iterations_used);
        REQUIRE(a.trace.step_norms.size() == r.step_norms.size());
        for (std::size_t i = 0; i < r.step_norms.size(); ++i) {
            CHECK(a.trace.step_norms[i] == r.step_norms[i]);
            CHECK(a.trace.residual_norms[i] == r.residual_norms[i]);
        }
        REQUIRE(a.trace.iterates.size() == r.iterates.size());
        for (std::size_t i = 0; i < r.iterates.size(); ++i)
            CHECK(a.trace.iterates[i] == r.iterates[i]);
    }
}

TEST_CASE("adaptive_solve does not switch on a converging run") {
    SolverParams p;
    p.alpha = 3.0;
    const double cands[] = {3.0, 0.0};
    const AdaptiveResult a = adaptive_solve(kCubic, near_cube_roots(0.05), p, cands);
    CHECK(a.trace.status == SolverStatus::converged);
    CHECK(a.switches.empty());
    CHECK(a.final_alpha == 3.0);
}

TEST_CASE("adaptive_solve rescues a start that strands alpha = 0") {
    // found by scanning for starts where the fixed alpha=0 iteration stalls
    // in a bounded oscillation while the candidate cycle escapes it
    const ComplexVec x0{Complex(0.08748854660184507, 0.48802489639193997),
                        Complex(0.04610889289336711, -0.02463395247564798),
                        Complex(0.5913950613393915, -0.23477356137609343)};
    SolverParams p;
    p.alpha = 0.0;
    p.max_iters = 60;

    const SolverTrace fixed0 = run_solver(kCubic, x0, p, Method::INVM);
    const double cands[] = {0.0, 3.0};
    const AdaptiveResult adaptive = adaptive_solve(kCubic, x0, p, cands);

    CHECK(adaptive.switches.size() >= 1);
    CHECK(adaptive.trace.residual_norms.back() < fixed0.residual_norms.back());
    CHECK(adaptive.trace.status == SolverStatus::converged);
}

TEST_CASE("adaptive_solve validates input") {
    SolverParams p;
    CHECK_THROWS_AS(adaptive_solve(kCubic, near_cube_roots(0.1), p, {}), domain_error);
}
