/**
 * @file sparse.hpp
 * @brief Compressed sparse row storage, deterministic triplet assembly and the
 *        symmetric-matrix wrapper carrying a symmetry certificate.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "lgnc/error.hpp"

namespace lgnc {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx, Vector values)
        : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
          values_(std::move(values)) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }
    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const Vector& values() const { return values_; }
    Vector& values() { return values_; }

    /// 0 when (i,j) is not stored.
    double operator()(int i, int j) const {
        const auto first = col_idx_.begin() + row_ptr_[i];
        const auto last = col_idx_.begin() + row_ptr_[i + 1];
        const auto it = std::lower_bound(first, last, j);
        return (it != last && *it == j) ? values_[it - col_idx_.begin()] : 0.0;
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
            y[i] = s;
        }
    }

    Vector operator*(std::span<const double> x) const {
        Vector y(rows_);
        multiply(x, y);
        return y;
    }

    /// y = A^T x
    Vector transpose_multiply(std::span<const double> x) const {
        Vector y(cols_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) y[col_idx_[k]] += values_[k] * x[i];
        }
        return y;
    }

    Vector diagonal() const {
        Vector d(std::min(rows_, cols_), 0.0);
        for (int i = 0; i < static_cast<int>(d.size()); ++i) d[i] = (*this)(i, i);
        return d;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    CsrMatrix transpose() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_idx_;
    Vector values_;
};

/// Collects (i, j, v) contributions; build() sorts by (i, j) with a stable
/// sort and sums duplicates in insertion order, so the result does not depend
/// on anything but the sequence of add() calls.
class TripletBuilder {
public:
    TripletBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}

    void add(int i, int j, double v) { entries_.push_back({i, j, v}); }
    void reserve(std::size_t n) { entries_.reserve(n); }

    CsrMatrix build() const {
        std::vector<std::size_t> order(entries_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::tie(entries_[a].i, entries_[a].j) < std::tie(entries_[b].i, entries_[b].j);
        });
        std::vector<int> row_ptr(rows_ + 1, 0), cols;
        Vector vals;
        for (std::size_t k = 0; k < order.size();) {
            const auto& e = entries_[order[k]];
            double s = 0.0;
            std::size_t m = k;
            while (m < order.size() && entries_[order[m]].i == e.i && entries_[order[m]].j == e.j) {
                s += entries_[order[m]].v;
                ++m;
            }
            cols.push_back(e.j);
            vals.push_back(s);
            ++row_ptr[e.i + 1];
            k = m;
        }
        for (int i = 0; i < rows_; ++i) row_ptr[i + 1] += row_ptr[i];
        return CsrMatrix(rows_, cols_, std::move(row_ptr), std::move(cols), std::move(vals));
    }

private:
    struct Entry {
        int i;
        int j;
        double v;
    };
    int rows_;
    int cols_;
    std::vector<Entry> entries_;
};

inline CsrMatrix CsrMatrix::transpose() const {
    TripletBuilder t(cols_, rows_);
    t.reserve(nnz());
    for (int i = 0; i < rows_; ++i) {
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.add(col_idx_[k], i, values_[k]);
    }
    return t.build();
}

/// max |A_ij - A_ji| / max |A| over stored entries; infinite if the pattern is
/// not symmetric or the matrix is not square.
inline double symmetry_defect(const CsrMatrix& a) {
    if (a.rows() != a.cols()) return INFINITY;
    const double scale = a.max_abs();
    double worst = 0.0;
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = rp[i]; k < rp[i + 1]; ++k) {
            const int j = ci[k];
            const auto first = ci.begin() + rp[j], last = ci.begin() + rp[j + 1];
            const auto it = std::lower_bound(first, last, i);
            if (it == last || *it != i) return INFINITY;
            worst = std::max(worst, std::abs(a.values()[k] - a.values()[it - ci.begin()]));
        }
    }
    return scale > 0.0 ? worst / scale : worst;
}

inline constexpr double kSymmetryTol = 1e-12;

/// Square matrix whose full symmetric pattern is stored, with its measured
/// relative symmetry defect.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;
    explicit SparseSymMatrix(CsrMatrix a) : a_(std::move(a)), defect_(symmetry_defect(a_)) {}

    const CsrMatrix& csr() const { return a_; }
    int n() const { return a_.rows(); }
    double defect() const { return defect_; }
    bool certified() const { return defect_ <= kSymmetryTol; }

    double operator()(int i, int j) const { return a_(i, j); }
    void multiply(std::span<const double> x, std::span<double> y) const { a_.multiply(x, y); }
    Vector operator*(std::span<const double> x) const { return a_ * x; }
    Vector diagonal() const { return a_.diagonal(); }

private:
    CsrMatrix a_;
    double defect_ = 0.0;
};

/// Symmetric Dirichlet elimination: zero the rows and columns of `fixed`,
/// put 1 on their diagonal.
inline CsrMatrix eliminate_dofs(const CsrMatrix& a, const std::vector<char>& fixed) {
    std::vector<int> row_ptr(a.rows() + 1, 0), cols;
    Vector vals;
    cols.reserve(a.nnz());
    vals.reserve(a.nnz());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            const int j = a.col_idx()[k];
            const bool fi = i < static_cast<int>(fixed.size()) && fixed[i];
            const bool fj = j < static_cast<int>(fixed.size()) && fixed[j];
            if (fi || fj) {
                if (i != j) continue;
                cols.push_back(j);
                vals.push_back(1.0);
            } else {
                cols.push_back(j);
                vals.push_back(a.values()[k]);
            }
        }
        row_ptr[i + 1] = static_cast<int>(cols.size());
    }
    return CsrMatrix(a.rows(), a.cols(), std::move(row_ptr), std::move(cols), std::move(vals));
}

}  // namespace lgnc
