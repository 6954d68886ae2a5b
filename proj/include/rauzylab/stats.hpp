#pragma once

#include <cstdint>
#include <vector>

#include "rauzylab/surface.hpp"
#include "rauzylab/ulam.hpp"

namespace rauzylab {

// --------------------------------------------------------------------------
// reference laws

// P(N([0,t)) = k) for the compound Poisson process with intensity theta and
// geometric multiplicities of parameter theta; theta = 1 recovers Poisson.
double polya_aeppli_pmf(double theta, double t, long k);

// --------------------------------------------------------------------------
// center classification

struct PointClass {
    bool periodic = false;
    long period = 0;        // in return-map steps (branch-word length 1)
    double jacobian = 0.0;  // |Jac D T^period| at the point, forward map
    double theta = 1.0;     // extremal index 1 - 1/|Jac|; 1 when non-periodic
};

// Matches p0 against the fixed points of the inventory's branch words.  A
// near-miss inside the ambiguity band errors instead of guessing: the
// extremal index is discontinuous in the periodic/non-periodic dichotomy.
PointClass classify_center(const BaseCell& base, const BranchInventory& inventory,
                           const std::vector<double>& p0, double match_tol = 1e-8,
                           double ambiguity_tol = 1e-6);

// --------------------------------------------------------------------------
// empirical measure calibration around a center

// Sorted distances from a long stationary orbit to a center: empirical
// quantiles give ball radii of prescribed invariant measure and vice versa.
struct DistanceCalibration {
    std::vector<double> center;
    std::vector<double> sorted_distances;
    double measure_scale = 1.0; // measure of the whole sampled class (1 = probability)

    double quantile_radius(double q) const;     // r with measure(B_r) ~ q
    double measure_of_radius(double r) const;   // empirical measure of B_r
};

// distances under mu_2 (return-map orbit on B)
DistanceCalibration calibrate_t2(const BaseCell& base, const std::vector<double>& p0,
                                 long samples, std::uint64_t seed);

// distances under the accelerated map's class measure (even-step orbit);
// the center must lie in B so the hits happen on one parity class
DistanceCalibration calibrate_g(const BaseCell& base, const std::vector<double>& p0,
                                long samples, std::uint64_t seed);

// --------------------------------------------------------------------------
// scaling constants u_n(t) = (log C + log n - log t) / dim for the observable
// phi = -log d(., p0), fitted so that n * measure(phi > u_n(t)) = t

struct ScalingLaw {
    double dim = 1.0;
    double log_c = 0.0;

    double u(double n, double t) const;
    double a() const { return dim; }            // u_n(t) = g(t)/a + b(n)
    double b(double n) const;                   // with g(t) = log C - log t
    double exceed_measure(double u_level) const; // fitted measure(phi > u)
};

// least-squares fit of log measure(B_r) = log C + dim * log r over a small-
// radius quantile window
ScalingLaw fit_scaling(const DistanceCalibration& cal, double dim, double q_lo = 3e-4,
                       double q_hi = 3e-2);

// numeric probe of the two normalizing-constant conditions for passing the
// law to the suspension flow
bool scaling_conditions_hold(const ScalingLaw& law);

// --------------------------------------------------------------------------
// shrinking-target schedules

struct TargetSchedule {
    std::vector<double> center;
    std::vector<double> radii;    // r_j, nonincreasing, j = 1..n
    std::vector<double> measures; // estimated invariant measure of each ball

    double en(long n) const; // E_n = sum of the first n measures
};

// measure(U_j) ~ min(q_cap, c/j): the divergence-boundary schedule
TargetSchedule nested_balls(const DistanceCalibration& cal, double c, long n,
                            double q_cap = 0.25);

// same schedule with radii taken from a fitted scaling law instead of raw
// order statistics; the empirical quantile radius at q ~ c/n rests on a
// handful of samples, while the fit pools the whole small-radius window
TargetSchedule nested_balls(const ScalingLaw& law, const std::vector<double>& center,
                            double c, long n, double q_cap = 0.25);

// constant target U_j = U (the Birkhoff / ergodic-theorem special case)
TargetSchedule fixed_ball(const DistanceCalibration& cal, double measure, long n);

// measure(U_j) ~ c/j^2: a summable schedule (precondition violations)
TargetSchedule convergent_balls(const DistanceCalibration& cal, double c, long n);

struct SbcReport {
    std::vector<long> checkpoints;
    std::vector<double> ratio; // S_n/E_n at the checkpoints
    double final_ratio = 0.0;
    double running_min = 0.0;  // after burn-in: liminf proxy
    double e_n = 0.0;
    std::uint64_t seed = 0;
};

// Birkhoff sums over the shrinking targets along one orbit, against the
// summed measures.  The three drivers differ in the iterated map and in the
// measure normalisation of the schedule:
//   t2: return-map orbit, mu_2 schedule, limit 1
//   g:  squared accelerated map, class-measure schedule, limit 1
//   t1: single accelerated steps, class-measure schedule, limit 1/2 (hits
//       land on one parity class only)
SbcReport sbc_ratio_t2(const BaseCell& base, const TargetSchedule& targets, long n,
                       std::uint64_t seed);
SbcReport sbc_ratio_g(const BaseCell& base, const TargetSchedule& targets, long n,
                      std::uint64_t seed);
SbcReport sbc_ratio_t1(const BaseCell& base, const TargetSchedule& targets, long n,
                       std::uint64_t seed);

// --------------------------------------------------------------------------
// extreme value laws

struct EvlReport {
    std::vector<double> t_grid;
    std::vector<double> empirical; // P(M_n <= u_n(t))
    std::vector<double> reference; // e^{-theta t}
    double ks = 0.0;
    double theta_hat = 1.0; // fitted decay rate of the empirical law
    double theta_ref = 1.0;
    PointClass center_class;
    long n = 0, trials = 0;
};

// cal_samples = 0 picks a default of max(200000, 20 n) calibration samples
EvlReport evl_t2(const BaseCell& base, const BranchInventory& classify_inv,
                 const std::vector<double>& p0, long n, long trials, std::uint64_t seed,
                 long cal_samples = 0);

// accelerated-map variant: single steps, whole-space probability measure in
// the scaling (half the class measure)
EvlReport evl_t1(const BaseCell& base, const BranchInventory& classify_inv,
                 const std::vector<double>& p0, long n, long trials, std::uint64_t seed,
                 long cal_samples = 0);

// --------------------------------------------------------------------------
// rare-event point process

struct ReppReport {
    std::vector<long> counts; // N([0,t)) per trial
    double mean = 0.0;
    double var_over_mean = 0.0;
    double chi2_poisson = 0.0; // distance of the count histogram to Poisson(t)
    double chi2_polya = 0.0;   // ... and to Polya-Aeppli(theta_ref, t)
    double theta_ref = 1.0;
    double t = 0.0;
    long n = 0, trials = 0;
};

ReppReport repp_t2(const BaseCell& base, const BranchInventory& classify_inv,
                   const std::vector<double>& p0, long n, double t, long trials,
                   std::uint64_t seed, long cal_samples = 0);

// --------------------------------------------------------------------------
// hitting and return time statistics

struct HittingReport {
    std::vector<double> t_grid;
    std::vector<double> hitting_cdf; // P(tau * measure(U) <= t), mu_2 starts
    std::vector<double> return_cdf;  // same with starts conditioned on U
    double ks_hitting = 0.0;         // vs 1 - e^{-theta t}
    double ks_return = 0.0;          // vs (1-theta) + theta(1 - e^{-theta t})
    double return_initial_mass = 0.0;
    double measure_u = 0.0;
    PointClass center_class;
    long trials = 0;
};

HittingReport hitting_return_stats(const BaseCell& base, const BranchInventory& classify_inv,
                                   const std::vector<double>& p0, double target_measure,
                                   long trials, std::uint64_t seed, long cal_samples = 200000);

// --------------------------------------------------------------------------
// flow experiments

// Shrinking flow target: the ball of radius delta(s) = c * s^{-gamma}
// (product Euclidean metric) around (z, u0), required to stay inside one
// unit strip of the suspension.
struct FlowTarget {
    std::vector<double> center_x;
    double center_u = 0.0;
    double c = 0.0;
    double gamma = 0.1;
    int strip = 0;

    double delta(double s) const; // evaluated at max(s, 1)
};

struct FlowSbcReport {
    double ratio = 0.0; // (1/E_T) int_0^T 1_{U_s}(F_s) ds
    double e_t = 0.0;
    double kappa = 0.0; // fitted local law measure(B_delta) = kappa * delta^2
    long hits = 0;      // distinct roof segments meeting the target
    std::vector<double> psi_seminorms; // induced-observable ladder (alpha = 1/2)
};

FlowSbcReport flow_sbc(const BaseCell& base, const FlowTarget& target, double horizon,
                       std::uint64_t seed, int seminorm_ladder = 0);

struct FlowEvlReport {
    std::vector<double> t_grid;
    std::vector<double> empirical; // P(M_T <= u_{[T/rbar2]}(t))
    std::vector<double> reference;
    double ks = 0.0;
    double theta_ref = 1.0;
    double r_bar = 0.0;
    long trials = 0;
};

FlowEvlReport flow_evl(const BaseCell& base, const BranchInventory& classify_inv,
                       const std::vector<double>& x0, double u0, double horizon, long trials,
                       std::uint64_t seed, long cal_samples = 200000);

} // namespace rauzylab
