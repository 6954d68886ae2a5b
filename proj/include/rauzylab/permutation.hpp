#pragma once

#include <array>
#include <string>
#include <vector>

#include "rauzylab/errors.hpp"

namespace rauzylab {

// Combinatorial pair pi = (pi0, pi1).  Symbols are 0..d-1; pi_eps[a] is the
// 0-based position of symbol a in row eps.  Named alphabets (letters) exist
// only at the I/O boundary.
class Permutation {
public:
    Permutation() = default;
    Permutation(std::vector<int> pi0, std::vector<int> pi1)
        : pi_{std::move(pi0), std::move(pi1)} {
        validate();
    }

    int size() const { return static_cast<int>(pi_[0].size()); }
    const std::vector<int>& row(int eps) const { return pi_[eps]; }
    int position(int eps, int symbol) const { return pi_[eps][symbol]; }

    // Symbol at a given position of row eps (inverse of the stored map).
    int symbol_at(int eps, int position) const {
        for (int a = 0; a < size(); ++a)
            if (pi_[eps][a] == position) return a;
        throw InvalidPermutation("position out of range");
    }

    // Last symbol of row eps: a(eps) = pi_eps^{-1}(d).
    int last_symbol(int eps) const { return symbol_at(eps, size() - 1); }

    // Monodromy invariant p = pi1 o pi0^{-1}, returned as a 1-based array
    // indexed by position (matching how the pair is usually displayed).
    std::vector<int> monodromy() const {
        std::vector<int> p(size());
        for (int a = 0; a < size(); ++a) p[pi_[0][a]] = pi_[1][a] + 1;
        return p;
    }

    // Reducible iff pi1 o pi0^{-1} fixes {1..k} for some k < d.
    bool is_irreducible() const {
        auto p = monodromy();
        int max_seen = 0;
        for (int k = 0; k < size() - 1; ++k) {
            max_seen = std::max(max_seen, p[k]);
            if (max_seen == k + 1) return false;
        }
        return true;
    }

    bool operator==(const Permutation& o) const { return pi_ == o.pi_; }
    bool operator<(const Permutation& o) const { return pi_ < o.pi_; }

    // "AB/BA"-style display with symbols mapped to letters A..Z.
    std::string str() const {
        std::string out;
        for (int eps = 0; eps < 2; ++eps) {
            for (int j = 0; j < size(); ++j) out += static_cast<char>('A' + symbol_at(eps, j));
            if (eps == 0) out += '/';
        }
        return out;
    }

    // Parses "ABC/CBA": row 0 defines the symbol alphabet, row 1 must be a
    // permutation of it.
    static Permutation parse(const std::string& text) {
        auto slash = text.find('/');
        if (slash == std::string::npos)
            throw InvalidPermutation("expected 'TOP/BOTTOM' in '" + text + "'");
        std::string top = text.substr(0, slash), bottom = text.substr(slash + 1);
        if (top.size() != bottom.size() || top.size() < 2)
            throw InvalidPermutation("rows must have equal length >= 2 in '" + text + "'");
        int d = static_cast<int>(top.size());
        std::vector<int> pi0(d, -1), pi1(d, -1);
        for (int j = 0; j < d; ++j) {
            int a0 = top[j] - 'A', a1 = bottom[j] - 'A';
            if (a0 < 0 || a0 >= d || a1 < 0 || a1 >= d)
                throw InvalidPermutation("symbols must be A.." +
                                         std::string(1, static_cast<char>('A' + d - 1)));
            pi0[a0] = j;
            pi1[a1] = j;
        }
        return Permutation(std::move(pi0), std::move(pi1));
    }

private:
    void validate() const {
        int d = size();
        if (d < 2) throw InvalidPermutation("alphabet size must be >= 2");
        for (int eps = 0; eps < 2; ++eps) {
            if (static_cast<int>(pi_[eps].size()) != d)
                throw InvalidPermutation("rows have different lengths");
            std::vector<bool> seen(d, false);
            for (int a = 0; a < d; ++a) {
                int pos = pi_[eps][a];
                if (pos < 0 || pos >= d || seen[pos])
                    throw InvalidPermutation("row " + std::to_string(eps) + " is not a bijection");
                seen[pos] = true;
            }
        }
    }

    std::array<std::vector<int>, 2> pi_;
};

} // namespace rauzylab
