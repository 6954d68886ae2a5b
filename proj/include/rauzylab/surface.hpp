#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rauzylab/induced.hpp"

namespace rauzylab {

// Suspension (height) data over an interval exchange: tau lives in the open
// cone where every proper top partial sum is positive and every proper bottom
// partial sum is negative.
struct TauVector {
    std::vector<double> entries;

    double total() const;
    Type type() const; // sign of the total; a zero total is degenerate
};

// strict partial-sum cone test for tau at the combinatorics of perm
bool tau_in_cone(const Permutation& perm, const TauVector& tau);

// The canonical cone point tau_a = pi1(a) - pi0(a), valid whenever perm is
// irreducible.
TauVector canonical_tau(const Permutation& perm);

// rejection sample from the cone intersected with [-1,1]^d
TauVector sample_tau(const Permutation& perm, Rng& rng, long max_attempts = 1000000);

// Closed curve built from the segments zeta_a = (lambda_a, tau_a): the top
// row concatenated forward, then the bottom row subtracted in reverse order.
// 2d segments, 2d+1 vertices, first == last.
struct ZipperedPolygon {
    std::vector<std::array<double, 2>> vertices;
    double area = 0.0; // shoelace
};

ZipperedPolygon polygon(const Permutation& perm, const std::vector<double>& lengths,
                        const TauVector& tau);

// Expansion time compensating one induction step: the cut removes the loser's
// mass, so the length renormalisation is e^{r0}.
double roof_r0(const Permutation& perm, const std::vector<double>& lengths);

// One induction step extended to the suspension data: (perm, lengths) steps
// as usual and tau contracts by the same inverse branch matrix as the
// lengths, tau'_winner = tau_winner - tau_loser.
struct ExtendedState {
    Permutation perm;
    std::vector<double> lengths; // unrenormalised, as after one cut
    TauVector tau;
    Type type; // type of the input pair (perm, lengths)
};

ExtendedState extended_step(const Permutation& perm, const std::vector<double>& lengths,
                            const TauVector& tau);

// Accumulated expansion times along the induction steps composing one return
// to B.
struct RoofRecord {
    std::vector<double> r0_steps;
    double r2 = 0.0; // sum of the steps
    long steps = 0;  // induction-step count of the return
};

RoofRecord roof_r2(const BaseCell& base, const std::vector<double>& x);

// Point of the suspension {(x, u) : x in B, 0 <= u < r2(x)} over the return
// map.  All of B shares the base permutation, so x is just the length vector.
struct SuspensionPoint {
    std::vector<double> lengths;
    double u = 0.0;
};

struct FlowResult {
    SuspensionPoint point;
    long crossings = 0; // roof identifications applied
};

// Advance time t through the suspension, applying (x, r2(x)) ~ (T x, 0) for
// the return map T at each roof crossing.
FlowResult flow_step(const BaseCell& base, SuspensionPoint start, double t);

// Monte Carlo estimate of the mean roof under the return map's invariant
// measure, from one long orbit.
double mean_r2(const BaseCell& base, long samples, std::uint64_t seed);

} // namespace rauzylab
