#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rauzylab/errors.hpp"
#include "rauzylab/permutation.hpp"
#include "rauzylab/rational.hpp"

namespace rauzylab {

// Small dense matrix of arbitrary-precision integers.  Induction matrices are
// products of unimodular elementary factors and their entries grow without
// bound, so fixed-width integers are not an option on long paths.
class IntMatrix {
public:
    IntMatrix() : n_(0) {}
    explicit IntMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, BigInt(0)) {}

    static IntMatrix identity(int n) {
        IntMatrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    int size() const { return n_; }
    BigInt& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    const BigInt& operator()(int i, int j) const {
        return a_[static_cast<std::size_t>(i) * n_ + j];
    }

    IntMatrix operator*(const IntMatrix& o) const {
        IntMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k) {
                const BigInt& aik = (*this)(i, k);
                if (aik == 0) continue;
                for (int j = 0; j < n_; ++j) r(i, j) += aik * o(k, j);
            }
        return r;
    }

    template <class S>
    std::vector<S> apply(const std::vector<S>& v) const {
        std::vector<S> r(n_, S(0));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if ((*this)(i, j) != 0) r[i] += S((*this)(i, j)) * v[j];
        return r;
    }

    bool strictly_positive() const {
        for (const BigInt& x : a_)
            if (x <= 0) return false;
        return n_ > 0;
    }

    bool operator==(const IntMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }

    // Fraction-free Gaussian elimination (Bareiss).
    BigInt determinant() const {
        IntMatrix m = *this;
        BigInt sign = 1, prev = 1;
        for (int k = 0; k < n_ - 1; ++k) {
            if (m(k, k) == 0) {
                int p = -1;
                for (int i = k + 1; i < n_; ++i)
                    if (m(i, k) != 0) { p = i; break; }
                if (p < 0) return 0;
                for (int j = 0; j < n_; ++j) std::swap(m(k, j), m(p, j));
                sign = -sign;
            }
            for (int i = k + 1; i < n_; ++i)
                for (int j = k + 1; j < n_; ++j)
                    m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
            prev = m(k, k);
        }
        return sign * m(n_ - 1, n_ - 1);
    }

    // Adjugate divided by the determinant; only valid for det = +-1, which is
    // all we ever invert (products of unimodular factors).
    IntMatrix unimodular_inverse() const {
        BigInt det = determinant();
        if (det != 1 && det != -1)
            throw Error("NotUnimodular", "inverse requested for det != +-1");
        IntMatrix adj(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                IntMatrix minor(n_ - 1);
                for (int r = 0, mr = 0; r < n_; ++r) {
                    if (r == j) continue;
                    for (int c = 0, mc = 0; c < n_; ++c) {
                        if (c == i) continue;
                        minor(mr, mc++) = (*this)(r, c);
                    }
                    ++mr;
                }
                BigInt cof = (n_ > 1) ? minor.determinant() : BigInt(1);
                adj(i, j) = (((i + j) % 2 == 0) ? cof : -cof) / det;
            }
        return adj;
    }

    std::vector<double> to_double_rowmajor() const {
        std::vector<double> r(a_.size());
        for (std::size_t i = 0; i < a_.size(); ++i) r[i] = a_[i].convert_to<double>();
        return r;
    }

    std::vector<BigInt> column_sums() const {
        std::vector<BigInt> s(n_, BigInt(0));
        for (int j = 0; j < n_; ++j)
            for (int i = 0; i < n_; ++i) s[j] += (*this)(i, j);
        return s;
    }

private:
    int n_;
    std::vector<BigInt> a_;
};

// One induction step in matrix form.  With winner w and loser l the length
// update is lambda'_w = lambda_w - lambda_l, i.e. lambda = N lambda' for the
// nonnegative unimodular factor N = I + E_{w,l}.  N is the inverse-branch
// factor; its inverse M = I - E_{w,l} is the forward step lambda' = M lambda.
inline IntMatrix elementary_theta(int d, int winner, int loser) {
    IntMatrix n = IntMatrix::identity(d);
    n(winner, loser) = 1;
    return n;
}

// A product of elementary factors along an induction path, acting projectively
// as the inverse branch lambda_start = normalize(matrix * lambda_end).
struct ThetaWord {
    IntMatrix matrix;                            // nonnegative, det +-1
    std::vector<std::pair<Permutation, Type>> path;

    explicit ThetaWord(int d) : matrix(IntMatrix::identity(d)) {}

    int step_count() const { return static_cast<int>(path.size()); }

    void append(const Permutation& perm, Type t, const IntMatrix& factor) {
        matrix = matrix * factor;
        path.emplace_back(perm, t);
    }

    // Forward length update lambda' = Theta^{-1*} lambda for one elementary
    // factor; exact in any scalar.
    template <class S>
    static std::vector<S> forward_step(const std::vector<S>& lambda, int winner, int loser) {
        std::vector<S> out = lambda;
        out[winner] -= lambda[loser];
        return out;
    }
};

} // namespace rauzylab
