#include "rauzylab/surface.hpp"

#include <cmath>
#include <numeric>

namespace rauzylab {

double TauVector::total() const {
    return std::accumulate(entries.begin(), entries.end(), 0.0);
}

Type TauVector::type() const {
    double t = total();
    if (t == 0.0) throw TieError("tau has zero total");
    return t > 0.0 ? Type::type0 : Type::type1;
}

bool tau_in_cone(const Permutation& perm, const TauVector& tau) {
    int d = perm.size();
    if (static_cast<int>(tau.entries.size()) != d) return false;
    double top = 0.0, bottom = 0.0;
    for (int k = 0; k + 1 < d; ++k) {
        top += tau.entries[perm.symbol_at(0, k)];
        bottom += tau.entries[perm.symbol_at(1, k)];
        if (!(top > 0.0) || !(bottom < 0.0)) return false;
    }
    return true;
}

TauVector canonical_tau(const Permutation& perm) {
    TauVector tau;
    tau.entries.resize(perm.size());
    for (int a = 0; a < perm.size(); ++a)
        tau.entries[a] = perm.position(1, a) - perm.position(0, a);
    return tau;
}

TauVector sample_tau(const Permutation& perm, Rng& rng, long max_attempts) {
    TauVector tau;
    tau.entries.resize(perm.size());
    for (long k = 0; k < max_attempts; ++k) {
        for (double& e : tau.entries) e = 2.0 * rng.uniform() - 1.0;
        if (tau_in_cone(perm, tau) && tau.total() != 0.0) return tau;
    }
    throw NoConvergence("no cone point found by rejection sampling");
}

ZipperedPolygon polygon(const Permutation& perm, const std::vector<double>& lengths,
                        const TauVector& tau) {
    if (!tau_in_cone(perm, tau)) throw TauOutsideCone("tau violates the partial-sum cone");
    int d = perm.size();
    if (static_cast<int>(lengths.size()) != d) throw InvalidLength("lengths/perm size mismatch");
    ZipperedPolygon poly;
    poly.vertices.push_back({0.0, 0.0});
    double x = 0.0, y = 0.0;
    for (int j = 0; j < d; ++j) {
        int a = perm.symbol_at(0, j);
        x += lengths[a];
        y += tau.entries[a];
        poly.vertices.push_back({x, y});
    }
    for (int j = d - 1; j >= 0; --j) {
        int a = perm.symbol_at(1, j);
        x -= lengths[a];
        y -= tau.entries[a];
        poly.vertices.push_back({x, y});
    }
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < poly.vertices.size(); ++i) {
        const auto& p = poly.vertices[i];
        const auto& q = poly.vertices[i + 1];
        s += p[0] * q[1] - q[0] * p[1];
    }
    poly.area = 0.5 * std::fabs(s);
    return poly;
}

double roof_r0(const Permutation& perm, const std::vector<double>& lengths) {
    Iet<double> iet(perm, lengths);
    int loser = iet.loser_symbol(iet.classify_type());
    return -std::log1p(-iet.lengths()[loser] / iet.total_length());
}

ExtendedState extended_step(const Permutation& perm, const std::vector<double>& lengths,
                            const TauVector& tau) {
    if (!tau_in_cone(perm, tau)) throw TauOutsideCone("tau violates the partial-sum cone");
    Iet<double> iet(perm, lengths);
    auto step = rv_induction_step(iet);
    ExtendedState out;
    out.perm = step.perm;
    out.lengths = std::move(step.lengths);
    out.tau = tau;
    out.tau.entries[step.winner] -= tau.entries[step.loser];
    out.type = step.type;
    if (!tau_in_cone(out.perm, out.tau))
        throw TauOutsideCone("image tau left the cone"); // not reachable for cone input
    return out;
}

RoofRecord roof_r2(const BaseCell& base, const std::vector<double>& x) {
    if (!base.contains(base.start_perm, x)) throw DomainError("point is not in the base cell");
    RoofRecord rec;
    Permutation p = base.start_perm;
    std::vector<double> lam = x;
    Type burst = Iet<double>(p, lam).classify_type();
    long t1_steps = 0, burst_len = 0;
    while (true) {
        Iet<double> iet(p, lam);
        auto step = rv_renormalize(iet);
        rec.r0_steps.push_back(-std::log1p(-iet.lengths()[step.loser] / iet.total_length()));
        p = step.perm;
        lam = std::move(step.lengths);
        ++rec.steps;
        if (++burst_len > kZorichBurstCap) throw BurstTooLong("burst exceeds the step cap");
        Type now = Iet<double>(p, lam).classify_type();
        if (now != burst) { // a full accelerated step just completed
            burst = now;
            burst_len = 0;
            if (++t1_steps > kReturnCap) throw ReturnCapExceeded("no return within the step cap");
            if (base.contains(p, lam)) break;
        }
    }
    rec.r2 = std::accumulate(rec.r0_steps.begin(), rec.r0_steps.end(), 0.0);
    return rec;
}

FlowResult flow_step(const BaseCell& base, SuspensionPoint start, double t) {
    if (t < 0.0) throw ParamOutOfRange("t must be >= 0");
    FlowResult out;
    out.point = std::move(start);
    out.point.u += t;
    double roof = roof_r2(base, out.point.lengths).r2;
    while (out.point.u >= roof) {
        out.point.u -= roof;
        out.point.lengths = first_return(base, out.point.lengths).point;
        ++out.crossings;
        roof = roof_r2(base, out.point.lengths).r2;
    }
    return out;
}

double mean_r2(const BaseCell& base, long samples, std::uint64_t seed) {
    if (samples < 1) throw ParamOutOfRange("samples must be >= 1");
    Rng rng(seed);
    auto x = sample_base_lebesgue(base, rng);
    long burn = 50;
    double acc = 0.0;
    for (long k = 0; k < samples + burn;) {
        try {
            if (k >= burn) acc += roof_r2(base, x).r2;
            x = first_return(base, x).point;
            ++k;
        } catch (const Error&) {
            x = sample_base_lebesgue(base, rng);
        }
    }
    return acc / static_cast<double>(samples);
}

} // namespace rauzylab
