#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace derham {

/// Dense integer matrix, row-major.
class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static IntMatrix identity(std::size_t n) {
        IntMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Int& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Int& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool is_zero() const {
        for (const auto& x : data_)
            if (x != 0) return false;
        return true;
    }

    friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
        if (a.cols_ != b.rows_) throw Error("matrix size mismatch");
        IntMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Int& x = a(i, k);
                if (x == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += x * b(k, j);
            }
        return c;
    }

    friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
    }
    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
    }
    /// row dst += f * row src
    void add_row(std::size_t dst, std::size_t src, const Int& f) {
        if (f == 0) return;
        for (std::size_t j = 0; j < cols_; ++j) (*this)(dst, j) += f * (*this)(src, j);
    }
    /// col dst += f * col src
    void add_col(std::size_t dst, std::size_t src, const Int& f) {
        if (f == 0) return;
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, dst) += f * (*this)(i, src);
    }
    void negate_row(std::size_t r) {
        for (std::size_t j = 0; j < cols_; ++j) (*this)(r, j) = -(*this)(r, j);
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Int> data_;
};

/// U * M * V = D with U, V unimodular and D diagonal with d_1 | d_2 | ... > 0.
struct SmithForm {
    std::vector<Int> diagonal;  // the nonzero invariant factors
    IntMatrix D;
    IntMatrix U;
    IntMatrix V;

    std::size_t rank() const { return diagonal.size(); }
};

/// Smith normal form with deterministic pivoting: the leftmost column with a
/// nonzero entry, in it the entry of smallest absolute value (first row on
/// ties).
inline SmithForm smith_normal_form(const IntMatrix& M) {
    const std::size_t R = M.rows();
    const std::size_t C = M.cols();
    SmithForm out{{}, M, IntMatrix::identity(R), IntMatrix::identity(C)};
    IntMatrix& A = out.D;
    IntMatrix& U = out.U;
    IntMatrix& V = out.V;

    auto row_op = [&](std::size_t dst, std::size_t src, const Int& f) {
        A.add_row(dst, src, f);
        U.add_row(dst, src, f);
    };
    auto col_op = [&](std::size_t dst, std::size_t src, const Int& f) {
        A.add_col(dst, src, f);
        V.add_col(dst, src, f);
    };
    auto swap_r = [&](std::size_t a, std::size_t b) {
        A.swap_rows(a, b);
        U.swap_rows(a, b);
    };
    auto swap_c = [&](std::size_t a, std::size_t b) {
        A.swap_cols(a, b);
        V.swap_cols(a, b);
    };

    for (std::size_t t = 0; t < R && t < C; ++t) {
        // pivot search
        std::optional<std::pair<std::size_t, std::size_t>> piv;
        for (std::size_t j = t; j < C && !piv; ++j)
            for (std::size_t i = t; i < R; ++i) {
                if (A(i, j) == 0) continue;
                if (!piv || abs(A(i, j)) < abs(A(piv->first, j))) piv = {i, j};
            }
        if (!piv) break;
        swap_r(t, piv->first);
        swap_c(t, piv->second);

        // quotient rounded to the nearest integer keeps remainders small
        auto nearest = [](const Int& a, const Int& b) {
            Int q = a / b;
            Int r = a - q * b;
            if (2 * abs(r) > abs(b)) q += (r.sign() == b.sign()) ? 1 : -1;
            return q;
        };
        for (;;) {
            // smallest entry of the pivot column, then of the pivot row
            std::size_t bi = t, bj = t;
            for (std::size_t i = t + 1; i < R; ++i)
                if (A(i, t) != 0 && abs(A(i, t)) < abs(A(bi, bj))) bi = i;
            for (std::size_t j = t + 1; j < C; ++j)
                if (A(t, j) != 0 && abs(A(t, j)) < abs(A(bi, bj))) bi = t, bj = j;
            swap_r(t, bi);
            swap_c(t, bj);

            bool clean = true;
            for (std::size_t i = t + 1; i < R; ++i) {
                if (A(i, t) == 0) continue;
                row_op(i, t, -nearest(A(i, t), A(t, t)));
                if (A(i, t) != 0) clean = false;
            }
            if (!clean) continue;
            for (std::size_t j = t + 1; j < C; ++j) {
                if (A(t, j) == 0) continue;
                col_op(j, t, -nearest(A(t, j), A(t, t)));
                if (A(t, j) != 0) clean = false;
            }
            if (!clean) continue;
            // every remaining entry must be a multiple of the pivot
            std::optional<std::size_t> bad;
            for (std::size_t i = t + 1; i < R && !bad; ++i)
                for (std::size_t j = t + 1; j < C; ++j)
                    if (A(i, j) % A(t, t) != 0) {
                        bad = i;
                        break;
                    }
            if (!bad) break;
            row_op(t, *bad, Int(1));
        }
        if (A(t, t) < 0) {
            A.negate_row(t);
            U.negate_row(t);
        }
        out.diagonal.push_back(A(t, t));
    }
    return out;
}

}  // namespace derham
