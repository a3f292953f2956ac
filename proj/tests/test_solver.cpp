#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "nmmix/solver.hpp"

using namespace nmmix;

namespace {

double theta_branch1(double theta, int d = 2) {
    double k = static_cast<double>(d) * d - 1.0;
    return k * theta / (1.0 + k * theta);
}

double theta_branch2(double theta, int d = 2) {
    double inv = 1.0 / (static_cast<double>(d) * d - 1.0);
    return (inv + theta) / (1.0 + inv + theta);
}

}  // namespace

TEST_CASE("sign-vector enumeration follows the labeling scheme") {
    CharacteristicFunction one_jump = fixtures::positive_jump(0.3);
    std::vector<SignVector> v1 = enumerate_sign_vectors(one_jump);
    REQUIRE(v1.size() == 2);
    CHECK(v1[0].s == std::vector<int>{1, 1});
    CHECK(v1[1].s == std::vector<int>{1, -1});

    CharacteristicFunction no_jump = fixtures::damped_cosine();
    std::vector<SignVector> v0 = enumerate_sign_vectors(no_jump);
    REQUIRE(v0.size() == 1);
    CHECK(v0[0].s == std::vector<int>{1});

    CharacteristicFunction two_jumps = fixtures::double_flip_staircase();
    std::vector<SignVector> v2 = enumerate_sign_vectors(two_jumps);
    REQUIRE(v2.size() == 4);
    CHECK(v2[0].s == std::vector<int>{1, 1, 1});
    CHECK(v2[1].s == std::vector<int>{1, -1, 1});
    CHECK(v2[2].s == std::vector<int>{1, 1, -1});
    CHECK(v2[3].s == std::vector<int>{1, -1, -1});

    SolveOptions capped;
    capped.max_jumps = 0;
    CHECK_THROWS_AS(enumerate_sign_vectors(one_jump, capped), CapExceeded);
}

TEST_CASE("condition (A) prunes sign pairs that disagree on non-Markovian intervals") {
    CharacteristicFunction theta = fixtures::theta_family(0.2);
    SignVector pp{{1, 1}}, pm{{1, -1}};
    CHECK(compatible(pm, pm, theta));
    CHECK(compatible(pp, pp, theta));
    CHECK_FALSE(compatible(pp, pm, theta));  // dip lives in interval 2
    CHECK_FALSE(compatible(pm, pp, theta));

    // Interval 2 of the positive-jump fixture is Markovian, so mismatching
    // signs there are allowed.
    CharacteristicFunction pj = fixtures::positive_jump(0.3);
    CHECK(compatible(pp, pm, pj));
}

TEST_CASE("the two theta-family branches match the closed formulas") {
    SignVector pp{{1, 1}}, pm{{1, -1}};
    for (double theta : {0.1, 0.2}) {
        CharacteristicFunction cf = fixtures::theta_family(theta);
        PabResult branch1 = solve_pab(cf, pm, pm);
        REQUIRE(branch1.feasible);
        CHECK(std::fabs(branch1.p - theta_branch1(theta)) < 1e-3);

        PabResult branch2 = solve_pab(cf, pp, pp);
        REQUIRE(branch2.feasible);
        CHECK(std::fabs(branch2.p - theta_branch2(theta)) < 1e-3);
    }

    // Incompatible pairs short-circuit to the p = 1 sentinel.
    PabResult sentinel = solve_pab(fixtures::theta_family(0.2), pp, pm);
    CHECK_FALSE(sentinel.feasible);
    CHECK(sentinel.p == 1.0);
    CHECK_FALSE(sentinel.diagnostic.empty());
}

TEST_CASE("measure_general picks the winning branch per theta") {
    struct Row {
        double theta;
        double want;
        int winning_second_sign;
    };
    // Branch crossover sits at theta = 1/6.
    for (const Row& row : {Row{0.1, theta_branch1(0.1), -1}, Row{0.2, theta_branch2(0.2), 1}}) {
        CharacteristicFunction cf = fixtures::theta_family(row.theta);
        MeasureResult res = measure_general(cf);
        CHECK(res.tclass == TractabilityClass::GeneralEnumeration);
        CHECK(std::fabs(res.p - row.want) < 1e-3);
        REQUIRE(res.winning_signs.has_value());
        CHECK(res.winning_signs->first.s[1] == row.winning_second_sign);
        CHECK(res.p >= res.pstar.value - 1e-6);
    }
}

TEST_CASE("the single-jump family scales with the dimension") {
    // d = 3: interval floor -1/8; the two branch formulas become
    // 8*theta/(1+8*theta) and (1/8+theta)/(9/8+theta), crossing at 1/56.
    double theta = 0.05;
    CharacteristicFunction cf = fixtures::theta_family(theta, 3);
    MeasureResult res = measure_general(cf);
    double b1 = 8.0 * theta / (1.0 + 8.0 * theta);
    double b2 = (0.125 + theta) / (1.125 + theta);
    CHECK(std::fabs(res.p - std::min(b1, b2)) < 1e-3);

    CharacteristicFunction small = fixtures::theta_family(0.01, 3);
    MeasureResult res_small = measure_general(small);
    CHECK(std::fabs(res_small.p - 8.0 * 0.01 / (1.0 + 0.08)) < 1e-3);
}

TEST_CASE("both branches meet at theta = 1/6") {
    double theta = 1.0 / 6.0;
    CHECK(theta_branch1(theta) == doctest::Approx(theta_branch2(theta)).epsilon(1e-9));
    CHECK(theta_branch1(theta) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CharacteristicFunction cf = fixtures::theta_family(theta);
    MeasureResult res = measure_general(cf);
    CHECK(std::fabs(res.p - 1.0 / 3.0) < 1e-3);
}

TEST_CASE("continuous inputs dispatch to the closed form") {
    CharacteristicFunction cf = fixtures::damped_cosine();
    MeasureResult res = measure_general(cf);
    CHECK(res.tclass == TractabilityClass::ContinuousClosedForm);
    CHECK(std::fabs(res.p - 0.2958) < 5e-4);
    REQUIRE(res.oracle_check.has_value());
    CHECK(std::fabs(res.oracle_check->p - res.p) < 1e-3);
    REQUIRE(res.companion.has_value());
    CHECK(res.companion->provenance == CompanionProvenance::HContinuous);
}

TEST_CASE("markovian inputs measure zero") {
    MeasureResult res = measure_general(fixtures::markovian_staircase());
    CHECK(res.verdict.markovian);
    CHECK(res.p == 0.0);
    CHECK(res.pstar.value == 0.0);
}

TEST_CASE("enumeration pathway never beats the closed form on continuous fixtures") {
    std::mt19937 rng(2718);
    for (int it = 0; it < 3; ++it) {
        CharacteristicFunction cf = fixtures::random_continuous_fixture(rng);
        GapReport gaps = extract_gaps(cf);
        double closed = measure_closed_form(gaps, TractabilityClass::ContinuousClosedForm);
        MeasureResult via = measure_via_enumeration(cf);
        CHECK(via.p >= closed - 1e-3);
        CHECK(via.p <= closed + 5e-3);
    }
}

TEST_CASE("oracle agreement for enumerated results") {
    CharacteristicFunction cf = fixtures::theta_family(0.2);
    MeasureResult res = measure_general(cf);
    REQUIRE(res.companion.has_value());
    REQUIRE(res.oracle_check.has_value());
    CHECK(std::fabs(res.oracle_check->p - res.p) < 1e-3);
    CHECK(verify_markovian_grid(mix(cf, res.companion->fn, res.p + 1e-3), 800, 1e-8).markovian);
    CHECK_FALSE(
        verify_markovian_grid(mix(cf, res.companion->fn, res.p - 2e-3), 800, 1e-8).markovian);
}

TEST_CASE("dephasing evolutions run through the same pipeline") {
    CharacteristicFunction cf =
        build_single(ChannelFamily::dephasing(), parse_expr("exp(-2*t/5)*cos(t)"), 3.5 * fixtures::kPi);
    MeasureResult res = measure_general(cf);
    // Same gap structure as the depolarizing case, same closed form.
    CHECK(std::fabs(res.p - 0.2958) < 5e-4);
    CHECK_FALSE(res.pstar.available);
}

TEST_CASE("dephasing enumeration uses the wider sign-flip floor") {
    // Same shape as the depolarizing single-jump family, but the jump floor
    // is -1, so the negative-branch formula becomes theta/(1+theta).
    double theta = 0.2;
    std::vector<Piece> pieces = {
        fixtures::make_piece(0.0, 1.0, "1"),
        fixtures::make_piece(1.0, 2.0, "-1+" + std::to_string(theta) + "*(t-1)"),
        fixtures::make_piece(2.0, 3.0,
                             "-1+" + std::to_string(theta) + "-" + std::to_string(theta) +
                                 "*(t-2)"),
        fixtures::make_piece(3.0, 4.0, "-1"),
    };
    CharacteristicFunction cf = build(ChannelFamily::dephasing(), pieces, {}, 4.0);
    MeasureResult res = measure_general(cf);
    CHECK(res.tclass == TractabilityClass::GeneralEnumeration);
    CHECK(std::fabs(res.p - theta / (1.0 + theta)) < 1e-3);
}

TEST_CASE("a cross-sign pair wins on the positive-jump fixture") {
    // The sign-flipping companion drops to the interval floor at the jump
    // and beats the positive-family closed form.
    CharacteristicFunction cf = fixtures::positive_jump(0.3);
    MeasureResult res = measure_via_enumeration(cf);
    double want = 0.3 / (1.0 + 1.0 / 3.0 + 0.3);
    CHECK(std::fabs(res.p - want) < 2e-3);
    REQUIRE(res.winning_signs.has_value());
    CHECK(res.winning_signs->first.s == std::vector<int>{1, -1});   // companion flips
    CHECK(res.winning_signs->second.s == std::vector<int>{1, 1});   // mixture stays positive
    // The class dispatch keeps the positive-family value, strictly above.
    MeasureResult cls = measure_general(cf);
    CHECK(cls.p == doctest::Approx(0.3 / 1.3));
    CHECK(res.p < cls.p - 1e-3);
}

TEST_CASE("two-jump enumeration agrees with the brute-force oracle") {
    // One Markovian drop, one non-Markovian upward jump: every sign-vector
    // pair survives condition (A), so the full 4x4 pair search runs.
    std::vector<Piece> pieces = {
        fixtures::make_piece(0.0, 1.0, "1"),
        fixtures::make_piece(1.0, 2.0, "0.5-0.1*(t-1)"),
        fixtures::make_piece(2.0, 3.0, "0.6-0.3*(t-2)"),
    };
    CharacteristicFunction cf = build(ChannelFamily::depolarizing(2), pieces, {}, 3.0);
    REQUIRE(cf.jumps().size() == 2);
    REQUIRE(classify_tractable(cf) == TractabilityClass::PositiveClosedForm);
    GapReport gaps = extract_gaps(cf);
    double p_plus = (gaps.delta_nm + gaps.pi_nm) / (1.0 + gaps.delta_nm + gaps.pi_nm);

    SolveOptions opts;
    opts.search_grid = 300;
    opts.final_grid = 800;
    opts.param_grid = 17;
    opts.refine_rounds = 1;
    opts.p_scan_points = 32;
    MeasureResult via = measure_via_enumeration(cf, opts);

    BruteForceOptions bf_opts;
    bf_opts.max_jumps = 2;
    double bf = brute_force_measure(cf, {}, bf_opts);

    CHECK(std::fabs(via.p - bf) < 2e-2);
    CHECK(via.p <= p_plus + 1e-3);  // sign-flip companions can only help
    CHECK(via.p >= via.pstar.value - 1e-6);
    CHECK(bf >= via.pstar.value - 1e-6);
}

TEST_CASE("extended-pattern inputs keep the continuous closed form") {
    std::vector<Piece> pieces = {fixtures::make_piece(0.0, 1.0, "exp(-2*t/5)*cos(t)"),
                                 fixtures::make_piece(1.0, 3.5 * fixtures::kPi,
                                                      "0.8*exp(-2*t/5)*cos(t)")};
    CharacteristicFunction cf =
        build(ChannelFamily::depolarizing(2), pieces, {}, 3.5 * fixtures::kPi);
    MeasureResult res = measure_general(cf);
    CHECK(res.tclass == TractabilityClass::ExtendedContinuous);
    GapReport gaps = extract_gaps(cf);
    CHECK(res.p == doctest::Approx(gaps.gamma_nm / (1.0 + gaps.gamma_nm)));
    REQUIRE(res.oracle_check.has_value());
    CHECK(std::fabs(res.oracle_check->p - res.p) < 1e-3);
    REQUIRE(res.companion.has_value());
    CHECK(res.companion->fn.jumps().empty());  // companion stays continuous
}
