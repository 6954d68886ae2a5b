#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "rauzylab/induced.hpp"

namespace rauzylab {

using Observable = std::function<double(const std::vector<double>&)>;

// Discretised transfer operator of the return map on B.  The grid lives in
// B's chart (the standard simplex): boxes of side 1/resolution on the first
// d-1 coordinates.  Rows are estimated by Monte Carlo: uniform samples per
// cell pushed through one return.
struct UlamOperator {
    BaseCell base;
    int resolution = 0;
    int samples_per_cell = 0;
    std::vector<long> active;                // chart box ids inside the simplex
    std::vector<int> active_index;           // box id -> active slot (-1 outside)
    std::vector<std::vector<double>> rows;   // row-stochastic, active x active
    double unassigned_fraction = 0.0;        // samples lost to aborted returns

    long cell_count() const { return static_cast<long>(active.size()); }
    long box_of_chart(const std::vector<double>& u) const;
    int cell_of_point(const std::vector<double>& x) const; // simplex point -> active slot
};

UlamOperator build_ulam(const BaseCell& base, const BranchInventory& inventory, int resolution,
                        int samples_per_cell, std::uint64_t seed);

struct SpectralReport {
    double leading_eigenvalue = 0.0;
    std::vector<double> h_b;  // invariant density as cell masses, sum 1
    double gap = 0.0;         // 1 - |second eigenvalue|
    std::vector<std::complex<double>> unit_circle_eigs; // |lambda| > 1 - 1e-3
};

SpectralReport spectral_analysis(const UlamOperator& op);

struct CorrelationReport {
    std::vector<double> cor;  // Cor(0..n_max)
    double rate = 0.0;        // fitted geometric decay rate
    double r2 = 0.0;
    double mean_phi = 0.0, mean_psi = 0.0;
    long samples = 0;
};

// Correlations of the return map under its invariant measure, estimated from
// one long orbit.
CorrelationReport correlation_decay(const BaseCell& base, const Observable& phi,
                                    const Observable& psi, int n_max, long orbit_len,
                                    std::uint64_t seed);

struct GCorrelationReport {
    std::vector<double> raw;      // orbit estimate of the correlation integral
    std::vector<double> c_n;      // renewal correction factors
    std::vector<double> residual; // |raw(n) - c_n * mean_phi * mean_psi|
    double mean_phi = 0.0, mean_psi = 0.0; // integrals under the accelerated measure
    double mu_b = 0.0;                     // measure of B in the same normalisation
    long samples = 0;
};

// Correlations of the squared accelerated map for observables supported in B,
// with the renewal correction c_n = 1 + sum_{m>n} tail(m) / mu(B) built from
// the return-time tail of the induced map.
GCorrelationReport g_correlation_decay(const BaseCell& base, const Observable& phi,
                                       const Observable& psi, int n_max, long orbit_len,
                                       std::uint64_t seed);

struct SeminormEstimate {
    double alpha = 0.0;
    double eps0 = 0.0;
    double value = 0.0;
    int resolution = 0;
};

// Oscillation seminorm sup_{eps <= eps0} eps^{-alpha} integral of
// osc(f, eps-ball) over the chart, from samples of f at cell centers.
SeminormEstimate quasi_holder_seminorm(const BaseCell& base, const Observable& f, double alpha,
                                       double eps0, const std::vector<double>& eps_ladder,
                                       int resolution);

} // namespace rauzylab
