#pragma once

#include <vector>

#include "rauzylab/errors.hpp"
#include "rauzylab/permutation.hpp"
#include "rauzylab/rational.hpp"

namespace rauzylab {

enum class Type { type0 = 0, type1 = 1 };

inline Type opposite(Type t) { return t == Type::type0 ? Type::type1 : Type::type0; }
inline int type_index(Type t) { return static_cast<int>(t); }

// Interval exchange transformation as combinatorial-metric data, with the
// derived translation vector w and the subinterval endpoints (in pi0 order,
// starting at 0).  Immutable after construction; all operations are pure.
template <class S>
class Iet {
public:
    Iet(Permutation perm, std::vector<S> lengths)
        : perm_(std::move(perm)), lengths_(std::move(lengths)) {
        int d = perm_.size();
        if (static_cast<int>(lengths_.size()) != d)
            throw InvalidLength("expected " + std::to_string(d) + " lengths");
        total_ = S(0);
        for (const S& l : lengths_) {
            if (!(l > S(0))) throw InvalidLength("lengths must be strictly positive");
            total_ += l;
        }
        // w_a = sum_{pi1(b)<pi1(a)} l_b - sum_{pi0(b)<pi0(a)} l_b
        w_.assign(d, S(0));
        std::vector<S> pre0(d + 1, S(0)), pre1(d + 1, S(0));
        for (int j = 0; j < d; ++j) {
            pre0[j + 1] = pre0[j] + lengths_[perm_.symbol_at(0, j)];
            pre1[j + 1] = pre1[j] + lengths_[perm_.symbol_at(1, j)];
        }
        left_.assign(d, S(0));
        for (int a = 0; a < d; ++a) {
            left_[a] = pre0[perm_.position(0, a)];
            w_[a] = pre1[perm_.position(1, a)] - pre0[perm_.position(0, a)];
        }
    }

    const Permutation& perm() const { return perm_; }
    const std::vector<S>& lengths() const { return lengths_; }
    const std::vector<S>& translations() const { return w_; }
    const S& total_length() const { return total_; }
    int size() const { return perm_.size(); }

    // Left endpoint of I_a.
    const S& left_endpoint(int a) const { return left_[a]; }

    // Symbol whose subinterval contains x.
    int locate(const S& x) const {
        if (!(x >= S(0)) || !(x < total_))
            throw DomainError("point outside [0,|lambda|)");
        for (int j = perm_.size() - 1; j >= 0; --j) {
            int a = perm_.symbol_at(0, j);
            if (x >= left_[a]) return a;
        }
        throw DomainError("locate failed");
    }

    S evaluate(const S& x) const { return x + w_[locate(x)]; }

    // Which of I_{a(0)}, I_{a(1)} is longer; ties are Keane-degenerate input.
    Type classify_type() const {
        const S& l0 = lengths_[perm_.last_symbol(0)];
        const S& l1 = lengths_[perm_.last_symbol(1)];
        if (ScalarTraits<S>::is_zero(l0 - l1, total_))
            throw TieError("lambda_{a(0)} == lambda_{a(1)}");
        return l0 > l1 ? Type::type0 : Type::type1;
    }

    int winner_symbol(Type t) const { return perm_.last_symbol(type_index(t)); }
    int loser_symbol(Type t) const { return perm_.last_symbol(1 - type_index(t)); }

private:
    Permutation perm_;
    std::vector<S> lengths_;
    std::vector<S> w_;
    std::vector<S> left_;
    S total_;
};

template <class S>
Iet<S> build_iet(const Permutation& perm, std::vector<S> lengths) {
    return Iet<S>(perm, std::move(lengths));
}

struct KeaneVerdict {
    bool ok = true;
    long violation_at = -1; // first n with f^n(dI_a) == dI_b, pi0(b) != 1
};

// Brute-force endpoint-orbit check of the Keane condition up to `depth`
// iterations.  Exact mode reports exact hits; float mode uses the tie
// tolerance relative to |lambda|.
template <class S>
KeaneVerdict check_keane(const Iet<S>& iet, long depth) {
    if (depth < 1) throw ParamOutOfRange("depth must be >= 1");
    int d = iet.size();
    std::vector<S> orbit;
    for (int a = 0; a < d; ++a) orbit.push_back(iet.left_endpoint(a));
    for (long n = 1; n <= depth; ++n) {
        for (int a = 0; a < d; ++a) orbit[a] = iet.evaluate(orbit[a]);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                if (iet.perm().position(0, b) == 0) continue;
                if (ScalarTraits<S>::is_zero(orbit[a] - iet.left_endpoint(b),
                                             iet.total_length()))
                    return KeaneVerdict{false, n};
            }
    }
    return KeaneVerdict{true, -1};
}

} // namespace rauzylab
