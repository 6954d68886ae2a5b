#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rauzylab/errors.hpp"
#include "rauzylab/stats.hpp"

using namespace rauzylab;

namespace {

const BaseCell& base2() {
    static BaseCell b = [] {
        double s = 1.0 + std::sqrt(2.0);
        return select_base(Permutation::parse("AB/BA"), {1.0 / s, std::sqrt(2.0) / s}, 5);
    }();
    return b;
}

const BranchInventory& inv2() {
    static BranchInventory inv = enumerate_branches(base2(), 12, 1e-4);
    return inv;
}

// a generic (non-periodic) center well inside B
std::vector<double> generic_center() { return base2().from_chart({0.37, 0.63}); }

// the branch fixed point with the smallest return-map Jacobian: the most
// clustered periodic center available, hence the smallest extremal index
const Branch& softest_branch() {
    static const Branch* best = [] {
        const Branch* pick = nullptr;
        double best_jac = std::numeric_limits<double>::infinity();
        for (const Branch& br : inv2().branches) {
            double j = jacobian_t2(br, branch_fixed_point(br));
            if (j < best_jac) {
                best_jac = j;
                pick = &br;
            }
        }
        return pick;
    }();
    return *best;
}

} // namespace

TEST_CASE("compound poisson reference pmf") {
    CHECK(polya_aeppli_pmf(0.7, 1.3, 0) == doctest::Approx(std::exp(-0.7 * 1.3)));
    CHECK(polya_aeppli_pmf(0.5, 1.0, 1) == doctest::Approx(0.25 * std::exp(-0.5)));

    // theta = 1 degenerates to Poisson
    for (long k = 0; k <= 6; ++k) {
        double poisson = std::exp(-2.0 + k * std::log(2.0) - std::lgamma(double(k + 1)));
        CHECK(polya_aeppli_pmf(1.0, 2.0, k) == doctest::Approx(poisson).epsilon(1e-12));
    }

    // proper distribution with mean t
    for (double theta : {0.3, 0.6, 0.9}) {
        double total = 0.0, mean = 0.0;
        double prev = 1.0;
        for (long k = 0; k <= 400; ++k) {
            double p = polya_aeppli_pmf(theta, 1.7, k);
            CHECK(p >= 0.0);
            total += p;
            mean += k * p;
            CHECK(total <= 1.0 + 1e-12);
            prev = p;
        }
        (void)prev;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(mean == doctest::Approx(1.7).epsilon(1e-6));
    }

    CHECK_THROWS_AS(polya_aeppli_pmf(0.0, 1.0, 1), ParamOutOfRange);
    CHECK_THROWS_AS(polya_aeppli_pmf(1.5, 1.0, 1), ParamOutOfRange);
    CHECK_THROWS_AS(polya_aeppli_pmf(0.5, -1.0, 1), ParamOutOfRange);
    CHECK_THROWS_AS(polya_aeppli_pmf(0.5, 1.0, -2), ParamOutOfRange);
}

TEST_CASE("center classification") {
    PointClass generic = classify_center(base2(), inv2(), generic_center());
    CHECK_FALSE(generic.periodic);
    CHECK(generic.theta == doctest::Approx(1.0));

    std::vector<double> fp = branch_fixed_point(softest_branch());
    PointClass per = classify_center(base2(), inv2(), fp);
    CHECK(per.periodic);
    CHECK(per.period == 1);
    CHECK(per.jacobian > 1.0);
    CHECK(per.theta == doctest::Approx(1.0 - 1.0 / per.jacobian));
    CHECK(per.theta > 0.0);
    CHECK(per.theta < 1.0);

    // a point inside the ambiguity band is refused, not guessed
    std::vector<double> near = fp;
    near[0] += 1e-7;
    near[1] -= 1e-7;
    CHECK_THROWS_AS(classify_center(base2(), inv2(), near), PeriodDetectionFailed);

    std::vector<double> outside = {0.9, 0.1};
    if (!base2().contains(base2().start_perm, outside))
        CHECK_THROWS_AS(classify_center(base2(), inv2(), outside), DomainError);
}

TEST_CASE("distance calibration and scaling law") {
    auto p0 = generic_center();
    DistanceCalibration cal = calibrate_t2(base2(), p0, 40000, 5);

    // quantile and measure are inverse within the empirical granularity
    for (double q : {0.001, 0.01, 0.1, 0.4}) {
        double r = cal.quantile_radius(q);
        CHECK(cal.measure_of_radius(r) == doctest::Approx(q).epsilon(0.1));
    }
    CHECK(std::is_sorted(cal.sorted_distances.begin(), cal.sorted_distances.end()));

    ScalingLaw law = fit_scaling(cal, 1.0);
    // self-consistency: n * measure(phi > u_n(t)) returns t
    for (double t : {0.5, 1.0, 2.0}) {
        double u = law.u(1000.0, t);
        CHECK(1000.0 * law.exceed_measure(u) == doctest::Approx(t).epsilon(1e-9));
        // and the fitted law tracks the empirical tail at moderate quantiles
        double emp = cal.measure_of_radius(std::exp(-u));
        CHECK(1000.0 * emp == doctest::Approx(t).epsilon(0.2));
    }
    CHECK(law.a() == doctest::Approx(1.0));
    CHECK(law.u(100.0, 1.0) == doctest::Approx(law.b(100.0)));
    CHECK(scaling_conditions_hold(law));
}

TEST_CASE("target schedules") {
    auto p0 = generic_center();
    DistanceCalibration cal = calibrate_t2(base2(), p0, 20000, 6);

    TargetSchedule div = nested_balls(cal, 5.0, 5000);
    CHECK(std::is_sorted(div.radii.rbegin(), div.radii.rend()));
    CHECK(div.en(5000) > div.en(2500) + 1.0);
    CHECK(div.measures.front() == doctest::Approx(0.25));

    TargetSchedule fix = fixed_ball(cal, 0.05, 1000);
    CHECK(fix.radii.front() == doctest::Approx(fix.radii.back()));
    CHECK(fix.en(1000) == doctest::Approx(50.0));

    TargetSchedule conv = convergent_balls(cal, 5.0, 5000);
    CHECK(conv.en(5000) - conv.en(2500) < 1.0);
    CHECK_THROWS_AS(sbc_ratio_t2(base2(), conv, 5000, 7), EnNotDivergent);
}

TEST_CASE("shrinking-target ratios: return map") {
    auto p0 = generic_center();
    DistanceCalibration cal = calibrate_t2(base2(), p0, 30000, 8);

    // constant family: the ratio is the Birkhoff average over the measure
    TargetSchedule fix = fixed_ball(cal, 0.05, 15000);
    SbcReport birk = sbc_ratio_t2(base2(), fix, 15000, 9);
    CHECK(birk.final_ratio == doctest::Approx(1.0).epsilon(0.12));

    TargetSchedule div = nested_balls(cal, 5.0, 15000);
    SbcReport rep = sbc_ratio_t2(base2(), div, 15000, 10);
    CHECK(rep.e_n > 20.0);
    CHECK(rep.final_ratio > 0.6);
    CHECK(rep.final_ratio < 1.4);
    CHECK(rep.running_min > 0.4);
    CHECK(rep.ratio.size() == rep.checkpoints.size());
}

TEST_CASE("shrinking-target ratios: accelerated maps") {
    auto p0 = generic_center();
    DistanceCalibration cal = calibrate_g(base2(), p0, 30000, 11);

    TargetSchedule fix = fixed_ball(cal, 0.04, 15000);
    SbcReport g = sbc_ratio_g(base2(), fix, 15000, 12);
    CHECK(g.final_ratio == doctest::Approx(1.0).epsilon(0.15));

    // single steps hit on one parity class only: the ratio halves
    TargetSchedule fix_long = fixed_ball(cal, 0.04, 30000);
    SbcReport t1 = sbc_ratio_t1(base2(), fix_long, 30000, 13);
    CHECK(t1.final_ratio == doctest::Approx(0.5).epsilon(0.22));
    CHECK(t1.running_min > 0.3);
}

TEST_CASE("extreme value law: non-periodic center") {
    EvlReport rep = evl_t2(base2(), inv2(), generic_center(), 1500, 200, 14, 60000);
    CHECK_FALSE(rep.center_class.periodic);
    CHECK(rep.theta_ref == doctest::Approx(1.0));
    CHECK(rep.ks < 0.18);
    CHECK(rep.theta_hat == doctest::Approx(1.0).epsilon(0.15));
    CHECK(std::is_sorted(rep.empirical.rbegin(), rep.empirical.rend()));
}

TEST_CASE("extreme value law: periodic center") {
    std::vector<double> fp = branch_fixed_point(softest_branch());
    EvlReport rep = evl_t2(base2(), inv2(), fp, 1500, 200, 15, 60000);
    CHECK(rep.center_class.periodic);
    CHECK(rep.theta_ref < 0.999);
    CHECK(rep.ks < 0.15);
    CHECK(rep.theta_hat == doctest::Approx(rep.theta_ref).epsilon(0.15));
}

TEST_CASE("extreme value law: single accelerated steps") {
    EvlReport rep = evl_t1(base2(), inv2(), generic_center(), 3000, 150, 16, 60000);
    CHECK(rep.ks < 0.18);
    CHECK(rep.theta_hat == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("rare-event point process") {
    ReppReport pois = repp_t2(base2(), inv2(), generic_center(), 1500, 1.0, 200, 17, 60000);
    CHECK(pois.mean == doctest::Approx(1.0).epsilon(0.15));
    CHECK(pois.var_over_mean > 0.75);
    CHECK(pois.var_over_mean < 1.25);
    CHECK(pois.chi2_poisson < 0.15);
    CHECK(pois.chi2_polya == doctest::Approx(pois.chi2_poisson).epsilon(1e-9));

    std::vector<double> fp = branch_fixed_point(softest_branch());
    ReppReport pa = repp_t2(base2(), inv2(), fp, 1500, 1.0, 200, 18, 60000);
    CHECK(pa.theta_ref < 0.999);
    CHECK(pa.mean == doctest::Approx(1.0).epsilon(0.25));
    // geometric clusters overdisperse the counts: var/mean tends to (2-theta)/theta
    CHECK(pa.var_over_mean > 1.0 + 0.5 * (2.0 - pa.theta_ref) / pa.theta_ref * 0.3);
    CHECK(pa.chi2_polya < pa.chi2_poisson);
}

TEST_CASE("hitting and return laws") {
    HittingReport rep =
        hitting_return_stats(base2(), inv2(), generic_center(), 2e-3, 150, 19, 60000);
    CHECK(rep.ks_hitting < 0.12);
    CHECK(rep.ks_return < 0.15);
    CHECK(rep.return_initial_mass < 0.15);

    std::vector<double> fp = branch_fixed_point(softest_branch());
    HittingReport per = hitting_return_stats(base2(), inv2(), fp, 2e-3, 150, 20, 60000);
    double theta = per.center_class.theta;
    CHECK(per.ks_hitting < 0.12);
    CHECK(per.ks_return < 0.15);
    // returns carry an immediate-return atom of mass 1 - theta
    CHECK(std::fabs(per.return_initial_mass - (1.0 - theta)) < 0.12);

    CHECK_THROWS_AS(hitting_return_stats(base2(), inv2(), generic_center(), 1e-7, 50, 21, 20000),
                    TargetTooSmall);
}

TEST_CASE("flow shrinking targets") {
    FlowTarget target;
    target.center_x = generic_center();
    target.center_u = 0.5;
    target.c = 0.1;
    target.gamma = 0.1;
    target.strip = 0;

    FlowSbcReport rep = flow_sbc(base2(), target, 2000.0, 22, 4);
    CHECK(rep.kappa > 0.0);
    CHECK(rep.e_t > 5.0);
    CHECK(rep.hits > 15);
    CHECK(rep.ratio > 0.55);
    CHECK(rep.ratio < 1.45);

    // the induced window observables stay uniformly manageable along the ladder
    REQUIRE(rep.psi_seminorms.size() == 4);
    std::vector<double> s = rep.psi_seminorms;
    std::sort(s.begin(), s.end());
    double median = 0.5 * (s[1] + s[2]);
    CHECK(s.front() > 0.0);
    CHECK(s.back() < 2.5 * median);

    FlowTarget straddle = target;
    straddle.center_u = 0.05; // ball dips below the strip floor
    CHECK_THROWS_AS(flow_sbc(base2(), straddle, 2000.0, 23, 0), TargetStraddlesStrip);

    FlowTarget bad = target;
    bad.gamma = 0.7;
    CHECK_THROWS_AS(flow_sbc(base2(), bad, 2000.0, 24, 0), ParamOutOfRange);
}

TEST_CASE("flow extreme value law") {
    FlowEvlReport rep = flow_evl(base2(), inv2(), generic_center(), 0.5, 1200.0, 150, 25, 50000);
    CHECK(rep.r_bar > 1.0);
    CHECK(rep.theta_ref == doctest::Approx(1.0));
    CHECK(rep.ks < 0.18);
    CHECK(std::is_sorted(rep.empirical.rbegin(), rep.empirical.rend()));
}
