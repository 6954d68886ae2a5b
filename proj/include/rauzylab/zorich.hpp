#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rauzylab/rauzy_veech.hpp"

namespace rauzylab {

inline constexpr long kZorichBurstCap = 1000000;
inline constexpr double kDegeneracyFloor = 1e-13;

// One accelerated step T1 = T0^{n1}, where n1 is the smallest k at which the
// induction type differs from the type at the start point.
template <class S>
struct ZorichStep {
    long n1 = 0;
    Permutation end_perm;
    std::vector<S> end_lengths; // renormalised, on the unit simplex
    ThetaWord theta;            // product of the n1 elementary factors
    Type start_type;
    Type end_type;

    ZorichStep() : end_perm(Permutation::parse("AB/BA")), theta(2) {}
};

template <class S>
void check_degeneracy(const std::vector<S>& lengths, const S& total) {
    if constexpr (!ScalarTraits<S>::exact) {
        for (const S& l : lengths)
            if (to_double(l) < kDegeneracyFloor * to_double(total))
                throw NearDegenerate("length below relative floor 1e-13");
    }
}

template <class S>
ZorichStep<S> zorich_step(const Permutation& perm, std::vector<S> lengths,
                          long cap = kZorichBurstCap) {
    ZorichStep<S> out;
    out.end_perm = perm;
    out.end_lengths = std::move(lengths);
    out.theta = ThetaWord(perm.size());

    Iet<S> start(out.end_perm, out.end_lengths);
    out.start_type = start.classify_type();
    Type current = out.start_type;
    while (current == out.start_type) {
        if (out.n1 >= cap) throw BurstTooLong("n1 exceeded burst cap");
        check_degeneracy(out.end_lengths, Iet<S>(out.end_perm, out.end_lengths).total_length());
        Iet<S> iet(out.end_perm, out.end_lengths);
        RvStep<S> step = rv_renormalize(iet);
        out.theta.append(out.end_perm, step.type, step.elementary);
        out.end_perm = step.perm;
        out.end_lengths = std::move(step.lengths);
        ++out.n1;
        current = Iet<S>(out.end_perm, out.end_lengths).classify_type();
    }
    out.end_type = current;
    return out;
}

template <class S>
std::vector<ZorichStep<S>> zorich_orbit(const Permutation& perm, std::vector<S> lengths,
                                        int n_steps, long cap = kZorichBurstCap) {
    std::vector<ZorichStep<S>> orbit;
    orbit.reserve(n_steps);
    Permutation p = perm;
    for (int k = 0; k < n_steps; ++k) {
        orbit.push_back(zorich_step(p, std::move(lengths), cap));
        p = orbit.back().end_perm;
        lengths = orbit.back().end_lengths;
    }
    return orbit;
}

// Regular grid on the first d-1 barycentric coordinates of the open simplex.
struct SimplexGrid {
    int d;
    int resolution;

    long cells() const {
        long c = 1;
        for (int i = 0; i + 1 < d; ++i) c *= resolution;
        return c;
    }

    long cell_of(const std::vector<double>& lambda) const {
        long idx = 0;
        for (int i = 0; i + 1 < d; ++i) {
            long k = static_cast<long>(lambda[i] * resolution);
            if (k < 0) k = 0;
            if (k >= resolution) k = resolution - 1;
            idx = idx * resolution + k;
        }
        return idx;
    }

    // barycentric corner (lower corner of the box, last coordinate implied)
    std::vector<double> corner_of(long idx) const {
        std::vector<double> c(d - 1, 0.0);
        for (int i = d - 2; i >= 0; --i) {
            c[i] = static_cast<double>(idx % resolution) / resolution;
            idx /= resolution;
        }
        return c;
    }
};

// Empirical invariant density of the squared accelerated map, kept separately
// on the two type-parity classes (types alternate, so T1^2 preserves each).
// Each class is normalised to total mass 1.
struct Mu1Estimate {
    SimplexGrid grid;
    std::vector<Permutation> perms; // Rauzy class vertices, sorted
    std::array<std::vector<double>, 2> mass;       // [eps][perm_index*cells + cell]
    std::array<std::vector<std::int64_t>, 2> counts;
    std::array<std::int64_t, 2> samples{0, 0};
    bool aborted = false;

    long bins_per_class() const { return static_cast<long>(perms.size()) * grid.cells(); }

    int perm_index(const Permutation& p) const {
        auto it = std::lower_bound(perms.begin(), perms.end(), p);
        if (it == perms.end() || !(*it == p)) return -1;
        return static_cast<int>(it - perms.begin());
    }

    long bin_of(const Permutation& p, const std::vector<double>& lambda) const {
        int pi = perm_index(p);
        if (pi < 0) throw DomainError("state outside the Rauzy class");
        return pi * grid.cells() + grid.cell_of(lambda);
    }

    double mass_at(int eps, const Permutation& p, const std::vector<double>& lambda) const {
        return mass[eps][bin_of(p, lambda)];
    }

    double std_error(int eps, long bin) const {
        if (samples[eps] == 0) return 0.0;
        double p = mass[eps][bin];
        return std::sqrt(p * (1.0 - p) / static_cast<double>(samples[eps]));
    }

    // L1 distance between the class-eps densities of two estimates
    double l1_distance(const Mu1Estimate& other, int eps) const {
        double s = 0.0;
        for (long b = 0; b < bins_per_class(); ++b)
            s += std::fabs(mass[eps][b] - other.mass[eps][b]);
        return s;
    }

    void finalize() {
        for (int eps = 0; eps < 2; ++eps) {
            mass[eps].assign(counts[eps].size(), 0.0);
            if (samples[eps] == 0) continue;
            for (std::size_t b = 0; b < counts[eps].size(); ++b)
                mass[eps][b] = static_cast<double>(counts[eps][b]) /
                               static_cast<double>(samples[eps]);
        }
    }
};

// Birkhoff histogram of Zorich orbits, binned by (permutation, grid cell) and
// split by the type at each visited state.  Aborted orbits (degeneracy of the
// double representation) contribute their partial data and set the flag.
inline Mu1Estimate estimate_mu1(const RauzyClass& rc,
                                const std::vector<std::pair<Permutation, std::vector<double>>>& seeds,
                                long n_steps, int resolution) {
    Mu1Estimate est;
    est.perms = rc.vertices;
    est.grid = SimplexGrid{static_cast<int>(rc.vertices.front().size()), resolution};
    for (int eps = 0; eps < 2; ++eps) est.counts[eps].assign(est.bins_per_class(), 0);

    for (const auto& [seed_perm, seed_lengths] : seeds) {
        Permutation p = seed_perm;
        std::vector<double> lam = seed_lengths;
        try {
            for (long k = 0; k < n_steps; ++k) {
                int eps = type_index(Iet<double>(p, lam).classify_type());
                est.counts[eps][est.bin_of(p, lam)] += 1;
                est.samples[eps] += 1;
                auto step = zorich_step(p, std::move(lam));
                p = step.end_perm;
                lam = std::move(step.end_lengths);
            }
        } catch (const Error& e) {
            est.aborted = true;
        }
    }
    est.finalize();
    return est;
}

} // namespace rauzylab
