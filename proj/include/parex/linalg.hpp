#pragma once

// Dense linear algebra for the linearly-implicit steppers: LU with partial
// pivoting, triangular solves and forward-difference Jacobians.
//
// Matrices are stored row-major: entry (i, j) lives at data()[i * dim + j].

#include <parex/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace parex {

namespace detail {

template <class Real>
bool finite(const Real& x) {
    using std::isfinite;
    return isfinite(x);
}

template <class Real>
bool all_finite(std::span<const Real> v) {
    return std::all_of(v.begin(), v.end(), [](const Real& x) { return finite(x); });
}

}  // namespace detail

template <class Real>
class DenseMatrix {
public:
    DenseMatrix() = default;

    explicit DenseMatrix(std::size_t dim, Real fill = Real(0)) : dim_(dim), data_(dim * dim, fill) {}

    DenseMatrix(std::initializer_list<std::initializer_list<Real>> rows) : dim_(rows.size()), data_() {
        data_.reserve(dim_ * dim_);
        for (const auto& r : rows) {
            if (r.size() != dim_) throw ConfigError("DenseMatrix: rows must form a square matrix");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static DenseMatrix identity(std::size_t dim) {
        DenseMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = Real(1);
        return m;
    }

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

    Real& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
    const Real& operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

    std::span<Real> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
    std::span<const Real> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    std::span<Real> values() { return data_; }
    std::span<const Real> values() const { return data_; }

    void fill(const Real& v) { std::fill(data_.begin(), data_.end(), v); }

    /// y = A x
    void multiply(std::span<const Real> x, std::span<Real> y) const {
        for (std::size_t i = 0; i < dim_; ++i) {
            Real acc(0);
            const Real* a = data_.data() + i * dim_;
            for (std::size_t j = 0; j < dim_; ++j) acc += a[j] * x[j];
            y[i] = acc;
        }
    }

    std::vector<Real> operator*(std::span<const Real> x) const {
        std::vector<Real> y(dim_);
        multiply(x, y);
        return y;
    }

private:
    std::size_t dim_ = 0;
    std::vector<Real> data_;
};

/// Packed LU factors of a square matrix: P A = L U with unit lower-triangular
/// L stored strictly below the diagonal and U on and above it. `pivots[i]` is
/// the row exchanged with row i at elimination step i (LAPACK convention).
template <class Real>
struct LUFactors {
    DenseMatrix<Real> packed;
    std::vector<std::size_t> pivots;

    [[nodiscard]] std::size_t dim() const noexcept { return packed.dim(); }

    /// Applies P to a vector in place.
    void permute(std::span<Real> b) const {
        for (std::size_t i = 0; i < pivots.size(); ++i)
            if (pivots[i] != i) std::swap(b[i], b[pivots[i]]);
    }

    [[nodiscard]] DenseMatrix<Real> lower() const {
        DenseMatrix<Real> l = DenseMatrix<Real>::identity(dim());
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t j = 0; j < i; ++j) l(i, j) = packed(i, j);
        return l;
    }

    [[nodiscard]] DenseMatrix<Real> upper() const {
        DenseMatrix<Real> u(dim());
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t j = i; j < dim(); ++j) u(i, j) = packed(i, j);
        return u;
    }
};

/// Pivots with |p| <= singular_pivot_tolerance * (max |entry| of the pivot's
/// original row) are treated as zero.
inline constexpr double singular_pivot_tolerance = 1e-14;

/// Factors `f.packed` in place. Single-threaded by construction.
template <class Real>
void lu_factor_in_place(LUFactors<Real>& f) {
    using std::abs;
    auto& a = f.packed;
    const std::size_t n = a.dim();
    f.pivots.resize(n);

    // Row scales follow their rows through the exchanges.
    std::vector<Real> scale(n, Real(0));
    for (std::size_t i = 0; i < n; ++i) {
        for (const Real& v : a.row(i)) {
            if (!detail::finite(v)) throw NonFiniteState("lu_factor: non-finite matrix entry");
            scale[i] = std::max<Real>(scale[i], abs(v));
        }
    }

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        Real best = abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            Real v = abs(a(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        f.pivots[k] = p;
        if (!(best > Real(singular_pivot_tolerance) * scale[p]))
            throw SingularMatrix("lu_factor: pivot " + std::to_string(k) + " below threshold");
        if (p != k) {
            std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(p).begin());
            std::swap(scale[k], scale[p]);
        }
        const Real inv = Real(1) / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            Real m = a(i, k) * inv;
            a(i, k) = m;
            if (m == Real(0)) continue;
            Real* ri = a.row(i).data();
            const Real* rk = a.row(k).data();
            for (std::size_t j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
        }
    }
}

template <class Real>
LUFactors<Real> lu_factor(DenseMatrix<Real> a) {
    LUFactors<Real> f{std::move(a), {}};
    lu_factor_in_place(f);
    return f;
}

/// Overwrites b with the solution of A x = b.
template <class Real>
void lu_solve_in_place(const LUFactors<Real>& f, std::span<Real> b) {
    const auto& a = f.packed;
    const std::size_t n = a.dim();
    f.permute(b);
    for (std::size_t i = 1; i < n; ++i) {
        const Real* ri = a.row(i).data();
        Real acc = b[i];
        for (std::size_t j = 0; j < i; ++j) acc -= ri[j] * b[j];
        b[i] = acc;
    }
    for (std::size_t i = n; i-- > 0;) {
        const Real* ri = a.row(i).data();
        Real acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= ri[j] * b[j];
        b[i] = acc / ri[i];
    }
}

template <class Real>
std::vector<Real> lu_solve(const LUFactors<Real>& f, std::span<const Real> b) {
    if (b.size() != f.dim()) throw ConfigError("lu_solve: dimension mismatch");
    std::vector<Real> x(b.begin(), b.end());
    lu_solve_in_place(f, std::span<Real>(x));
    return x;
}

/// Forward-difference Jacobian of f(du, u, p, t) at (u, t), written into `jac`.
/// Column i uses the step sqrt(eps) * max(|u_i|, 1e-5). Performs dim + 1 calls.
template <class Real, class Rhs>
void finite_diff_jacobian(DenseMatrix<Real>& jac, Rhs&& f, std::span<const Real> u, std::span<const Real> p,
                          const Real& t) {
    using std::abs;
    using std::sqrt;
    const std::size_t n = u.size();
    if (jac.dim() != n) jac = DenseMatrix<Real>(n);

    std::vector<Real> f0(n), f1(n), up(u.begin(), u.end());
    f(std::span<Real>(f0), u, p, t);
    if (!detail::all_finite<Real>(f0)) throw NonFiniteRHS("finite_diff_jacobian: f(u) not finite");

    const Real root_eps = sqrt(std::numeric_limits<Real>::epsilon());
    for (std::size_t i = 0; i < n; ++i) {
        const Real saved = up[i];
        up[i] = saved + root_eps * std::max<Real>(abs(saved), Real(1e-5));
        const Real step = up[i] - saved;
        f(std::span<Real>(f1), std::span<const Real>(up), p, t);
        if (!detail::all_finite<Real>(f1)) throw NonFiniteRHS("finite_diff_jacobian: perturbed f not finite");
        for (std::size_t r = 0; r < n; ++r) jac(r, i) = (f1[r] - f0[r]) / step;
        up[i] = saved;
    }
}

template <class Real, class Rhs>
DenseMatrix<Real> finite_diff_jacobian(Rhs&& f, std::span<const Real> u, std::span<const Real> p, const Real& t) {
    DenseMatrix<Real> jac(u.size());
    finite_diff_jacobian(jac, std::forward<Rhs>(f), u, p, t);
    return jac;
}

}  // namespace parex
