#pragma once

// Subdividing sequences, polynomial extrapolation of the first T-table column
// (Aitken-Neville recursion and precomputed barycentric weights) and the
// per-order work model used for order selection.

#include <parex/errors.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace parex {

enum class SequenceKind { harmonic, romberg, bulirsch };

inline std::string_view to_string(SequenceKind k) {
    switch (k) {
        case SequenceKind::harmonic:
            return "harmonic";
        case SequenceKind::romberg:
            return "romberg";
        case SequenceKind::bulirsch:
            return "bulirsch";
    }
    return "?";
}

inline SequenceKind parse_sequence_kind(std::string_view s) {
    if (s == "harmonic") return SequenceKind::harmonic;
    if (s == "romberg") return SequenceKind::romberg;
    if (s == "bulirsch") return SequenceKind::bulirsch;
    throw ConfigError("unknown sequence kind '" + std::string(s) + "'");
}

struct SubdividingSequence {
    SequenceKind kind = SequenceKind::harmonic;
    int multiple = 1;
};

/// First `count` step counts n_1 < n_2 < ... of the sequence, each scaled by
/// seq.multiple.
inline std::vector<int> sequence_values(SubdividingSequence seq, std::size_t count) {
    if (seq.multiple < 1) throw ConfigError("sequence multiple must be positive");
    std::vector<int> n(count);
    for (std::size_t j = 0; j < count; ++j) {
        switch (seq.kind) {
            case SequenceKind::harmonic:
                n[j] = static_cast<int>(j + 1);
                break;
            case SequenceKind::romberg:
                n[j] = 1 << j;
                break;
            case SequenceKind::bulirsch:
                n[j] = j < 3 ? static_cast<int>(j + 1) : 2 * n[j - 2];
                break;
        }
    }
    for (int& v : n) v *= seq.multiple;
    return n;
}

/// Aitken-Neville recursion over the first k = column.size() entries of the
/// T-table. Returns (T_{k,k}, T_{k,k-1}); for k = 1 both equal T_{1,1}.
/// `power` is the exponent of h in the error expansion (2 for symmetric
/// internal methods).
template <class Real>
std::pair<std::vector<Real>, std::vector<Real>> aitken_neville(std::span<const std::vector<Real>> column,
                                                               std::span<const int> n, int power) {
    const std::size_t k = column.size();
    if (k == 0) throw ConfigError("aitken_neville: empty column");
    if (n.size() < k) throw ConfigError("aitken_neville: sequence shorter than column");

    std::vector<std::vector<Real>> t(column.begin(), column.end());
    std::vector<Real> sub = t[0];
    for (std::size_t l = 1; l < k; ++l) {
        if (l == k - 1) sub = t[k - 1];
        for (std::size_t j = k - 1; j >= l; --j) {
            Real ratio = Real(n[j]) / Real(n[j - l]);
            Real r = ratio;
            for (int e = 1; e < power; ++e) r *= ratio;
            const Real denom = r - Real(1);
            auto& cur = t[j];
            const auto& prev = t[j - 1];
            for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += (cur[i] - prev[i]) / denom;
        }
    }
    if (k == 1) sub = t[0];
    return {std::move(t[k - 1]), std::move(sub)};
}

/// Barycentric extrapolation weights: coefficients(k)[j] combines T_{j,1},
/// j < k, into the order-k extrapolant at h = 0.
template <class Real>
class BarycentricTableau {
public:
    BarycentricTableau() = default;

    BarycentricTableau(std::span<const int> n, int power, std::size_t max_rows) : power_(power) {
        if (max_rows == 0) throw ConfigError("tableau needs at least one row");
        if (n.size() < max_rows) throw ConfigError("tableau: sequence shorter than max_rows");
        if (power != 1 && power != 2) throw ConfigError("tableau power must be 1 or 2");
        std::vector<Real> x(max_rows);
        for (std::size_t j = 0; j < max_rows; ++j) {
            Real inv = Real(1) / Real(n[j]);
            x[j] = power == 2 ? inv * inv : inv;
        }
        coeffs_.resize(max_rows);
        for (std::size_t k = 1; k <= max_rows; ++k) {
            // rho(0) = prod(-x_i);  w_j = prod_{i != j} 1 / (x_j - x_i)
            Real rho(1);
            for (std::size_t i = 0; i < k; ++i) rho *= -x[i];
            auto& c = coeffs_[k - 1];
            c.resize(k);
            for (std::size_t j = 0; j < k; ++j) {
                Real w(1);
                for (std::size_t i = 0; i < k; ++i)
                    if (i != j) w /= (x[j] - x[i]);
                c[j] = rho * w / (-x[j]);
            }
        }
    }

    [[nodiscard]] int power() const noexcept { return power_; }
    [[nodiscard]] std::size_t max_rows() const noexcept { return coeffs_.size(); }
    [[nodiscard]] std::span<const Real> coefficients(std::size_t k) const { return coeffs_.at(k - 1); }

private:
    int power_ = 2;
    std::vector<std::vector<Real>> coeffs_;
};

template <class Real>
BarycentricTableau<Real> build_barycentric_tableau(std::span<const int> n, int power, std::size_t max_rows) {
    return BarycentricTableau<Real>(n, power, max_rows);
}

/// out = sum_{j<k} c_{k,j} T_{j,1}, evaluated as T_{1,1} + sum_{j>=1} c_{k,j} (T_{j,1} - T_{1,1})
/// which reproduces a constant column exactly.
template <class Real>
void barycentric_extrapolate(const BarycentricTableau<Real>& tab, std::size_t k,
                             std::span<const std::vector<Real>> column, std::span<Real> out) {
    if (k == 0 || k > tab.max_rows()) throw ConfigError("barycentric_extrapolate: order outside tableau");
    if (column.size() < k) throw ConfigError("barycentric_extrapolate: column shorter than order");
    auto c = tab.coefficients(k);
    const std::size_t d = out.size();
    const auto& base = column[0];
    for (std::size_t i = 0; i < d; ++i) {
        Real acc(0);
        for (std::size_t j = 1; j < k; ++j) acc += c[j] * (column[j][i] - base[i]);
        out[i] = base[i] + acc;
    }
}

template <class Real>
std::vector<Real> barycentric_extrapolate(const BarycentricTableau<Real>& tab, std::size_t k,
                                          std::span<const std::vector<Real>> column) {
    if (column.empty()) throw ConfigError("barycentric_extrapolate: empty column");
    std::vector<Real> out(column[0].size());
    barycentric_extrapolate(tab, k, column, std::span<Real>(out));
    return out;
}

enum class StepperKind { explicit_midpoint, implicit_euler, implicit_midpoint_smoothed };

/// Relative cost of the primitive operations, in rhs-evaluation units.
struct WorkWeights {
    double rhs = 1.0;
    double lu = 1.0;
    double solve = 1.0;
    double jacobian = 1.0;

    /// Default weights for a d-dimensional system: a Jacobian costs d / 5.
    static WorkWeights for_dimension(std::size_t d) { return {1.0, 1.0, 1.0, static_cast<double>(d) / 5.0}; }
};

/// Stage count A_k of one step with k rows.
///   explicit midpoint:  sum_{j<=k+1} (n_j + 1)
///   implicit Euler:     sum_{j<=k} (rhs*n_j + lu + solve*n_j) + jacobian
///   smoothed midpoint:  as implicit Euler with n_j + 1 substeps per row
inline double stage_count(StepperKind kind, std::span<const int> n, std::size_t k, const WorkWeights& w) {
    const std::size_t rows = kind == StepperKind::explicit_midpoint ? k + 1 : k;
    if (k == 0 || n.size() < rows) throw ConfigError("stage_count: sequence too short for order");
    double a = 0.0;
    for (std::size_t j = 0; j < rows; ++j) {
        const double nj = n[j];
        switch (kind) {
            case StepperKind::explicit_midpoint:
                a += nj + 1.0;
                break;
            case StepperKind::implicit_euler:
                a += w.rhs * nj + w.lu + w.solve * nj;
                break;
            case StepperKind::implicit_midpoint_smoothed:
                a += (w.rhs + w.solve) * (nj + 1.0) + w.lu;
                break;
        }
    }
    if (kind != StepperKind::explicit_midpoint) a += w.jacobian;
    return a;
}

/// Cached A_k for k = 1..max_order.
class WorkModel {
public:
    WorkModel() = default;
    WorkModel(StepperKind kind, std::span<const int> n, std::size_t max_order, const WorkWeights& w) {
        stages_.reserve(max_order);
        for (std::size_t k = 1; k <= max_order; ++k) stages_.push_back(stage_count(kind, n, k, w));
    }
    [[nodiscard]] double operator()(std::size_t k) const { return stages_.at(k - 1); }
    [[nodiscard]] std::size_t max_order() const noexcept { return stages_.size(); }

private:
    std::vector<double> stages_;
};

}  // namespace parex
