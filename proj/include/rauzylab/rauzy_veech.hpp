#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <vector>

#include "rauzylab/iet.hpp"
#include "rauzylab/theta.hpp"

namespace rauzylab {

// Permutation move of Rauzy-Veech induction: the winner's row is unchanged;
// the loser (the last symbol of the opposite row) is reinserted immediately
// after the winner in that row.
inline Permutation rauzy_move(const Permutation& perm, Type t) {
    int d = perm.size();
    int eps = type_index(t);
    int winner = perm.last_symbol(eps);
    int changed_row = 1 - eps; // row ending in the loser
    std::vector<int> order(d);
    for (int j = 0; j < d; ++j) order[j] = perm.symbol_at(changed_row, j);
    int loser = order.back();
    order.pop_back();
    auto it = std::find(order.begin(), order.end(), winner);
    order.insert(it + 1, loser);
    std::vector<int> new_row(d);
    for (int j = 0; j < d; ++j) new_row[order[j]] = j;
    if (changed_row == 0) return Permutation(std::move(new_row), perm.row(1));
    return Permutation(perm.row(0), std::move(new_row));
}

template <class S>
struct RvStep {
    Permutation perm;
    std::vector<S> lengths;
    Type type;
    int winner;
    int loser;
    IntMatrix elementary; // inverse-branch factor N: lambda = N lambda'
};

// Unrenormalised induction: cut off the loser.  |lengths'| = |lengths| - lambda_loser.
template <class S>
RvStep<S> rv_induction_step(const Iet<S>& iet) {
    Type t = iet.classify_type();
    int winner = iet.winner_symbol(t);
    int loser = iet.loser_symbol(t);
    std::vector<S> lengths = ThetaWord::forward_step(iet.lengths(), winner, loser);
    return RvStep<S>{rauzy_move(iet.perm(), t), std::move(lengths), t, winner, loser,
                     elementary_theta(iet.size(), winner, loser)};
}

// Renormalised induction on the unit simplex: divide by 1 - lambda_loser.
template <class S>
RvStep<S> rv_renormalize(const Iet<S>& iet) {
    if constexpr (ScalarTraits<S>::exact) {
        if (iet.total_length() != S(1)) throw NotNormalized("|lambda| != 1");
    } else {
        if (std::fabs(to_double(iet.total_length()) - 1.0) > 1e-9)
            throw NotNormalized("|lambda| != 1");
    }
    RvStep<S> step = rv_induction_step(iet);
    // dividing by the remaining total (= 1 - lambda_loser on the simplex)
    // keeps rounding drift from compounding along long orbits
    S factor = iet.total_length() - iet.lengths()[step.loser];
    for (S& l : step.lengths) l /= factor;
    return step;
}

// Markov cell label: which Delta_{pi,eps} contains lambda.
template <class S>
std::pair<Permutation, Type> markov_cell(const Iet<S>& iet) {
    return {iet.perm(), iet.classify_type()};
}

struct RauzyClass {
    std::vector<Permutation> vertices;              // sorted lexicographically
    std::map<std::pair<int, int>, int> edges;       // (vertex, eps) -> vertex
    std::map<std::pair<int, int>, IntMatrix> theta_factors;

    int index_of(const Permutation& p) const {
        auto it = std::lower_bound(vertices.begin(), vertices.end(), p);
        if (it == vertices.end() || !(*it == p)) return -1;
        return static_cast<int>(it - vertices.begin());
    }
};

// BFS closure of an irreducible permutation under both induction moves.
inline RauzyClass rauzy_class(const Permutation& start) {
    if (!start.is_irreducible())
        throw ReduciblePermutation("Rauzy class of a reducible permutation");
    std::vector<Permutation> seen{start};
    std::queue<Permutation> todo;
    todo.push(start);
    std::vector<std::pair<std::pair<Permutation, int>, Permutation>> raw_edges;
    while (!todo.empty()) {
        Permutation p = todo.front();
        todo.pop();
        for (int eps = 0; eps < 2; ++eps) {
            Permutation q = rauzy_move(p, static_cast<Type>(eps));
            raw_edges.push_back({{p, eps}, q});
            if (std::find(seen.begin(), seen.end(), q) == seen.end()) {
                seen.push_back(q);
                todo.push(q);
            }
        }
    }
    RauzyClass rc;
    rc.vertices = seen;
    std::sort(rc.vertices.begin(), rc.vertices.end());
    for (auto& [from, to] : raw_edges) {
        int i = rc.index_of(from.first), j = rc.index_of(to);
        rc.edges[{i, from.second}] = j;
        int eps = from.second;
        int winner = from.first.last_symbol(eps);
        int loser = from.first.last_symbol(1 - eps);
        rc.theta_factors.insert({{i, eps}, elementary_theta(from.first.size(), winner, loser)});
    }
    return rc;
}

template <class S>
struct OrbitRecord {
    std::vector<std::pair<Permutation, std::vector<S>>> states; // before each step + final
    std::vector<Type> types;
    ThetaWord theta;

    OrbitRecord(int d) : theta(d) {}
};

// n renormalised Rauzy-Veech steps with the accumulated inverse-branch matrix.
template <class S>
OrbitRecord<S> iterate_t0(const Permutation& perm, std::vector<S> lengths, int n) {
    OrbitRecord<S> rec(perm.size());
    Permutation p = perm;
    for (int k = 0; k < n; ++k) {
        Iet<S> iet(p, lengths);
        rec.states.emplace_back(p, lengths);
        RvStep<S> step = rv_renormalize(iet);
        rec.types.push_back(step.type);
        rec.theta.append(p, step.type, step.elementary);
        p = step.perm;
        lengths = std::move(step.lengths);
    }
    rec.states.emplace_back(p, lengths);
    return rec;
}

} // namespace rauzylab
