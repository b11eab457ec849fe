#include "simplex_slice/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace sslice {

namespace {

constexpr double kPivotTol = 1e-11;

// Tableau over [u; v; s; art] >= 0 with x = u - v and A x + s = b.
class Tableau {
public:
    Tableau(const Matrix& A, const Vector& b) : m_(A.rows()), n_(A.cols()) {
        width_ = 2 * n_ + m_;
        std::vector<Eigen::Index> art_rows;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (b(i) < 0) art_rows.push_back(i);
        }
        n_art_ = static_cast<Eigen::Index>(art_rows.size());
        cols_ = width_ + n_art_;
        t_ = Matrix::Zero(m_ + 1, cols_ + 1);
        basis_.resize(m_);
        Eigen::Index next_art = width_;
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double sgn = b(i) < 0 ? -1.0 : 1.0;
            t_.row(i).segment(0, n_) = sgn * A.row(i);
            t_.row(i).segment(n_, n_) = -sgn * A.row(i);
            t_(i, 2 * n_ + i) = sgn;
            t_(i, cols_) = sgn * b(i);
            if (sgn < 0) {
                t_(i, next_art) = 1.0;
                basis_[i] = next_art++;
            } else {
                basis_[i] = 2 * n_ + i;
            }
        }
    }

    /// Optimizes the objective row `obj` (maximization, in reduced form held
    /// in the last row). Columns >= `limit` never enter.
    bool optimize(Eigen::Index limit) {
        for (int iter = 0; iter < 50000; ++iter) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < limit; ++j) {
                if (t_(m_, j) < -kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return true;
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m_; ++i) {
                if (t_(i, enter) > kPivotTol) {
                    const double ratio = t_(i, cols_) / t_(i, enter);
                    if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave >= 0 && basis_[i] < basis_[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        throw NumericalFailure("lp: iteration limit reached");
    }

    void set_objective(const Vector& cost) {
        // Reduced row for max cost.x: store -cost, then eliminate basics.
        t_.row(m_).setZero();
        for (Eigen::Index j = 0; j < cost.size(); ++j) t_(m_, j) = -cost(j);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double coef = t_(m_, basis_[i]);
            if (coef != 0.0) t_.row(m_) -= coef * t_.row(i);
        }
    }

    /// Removes artificial variables from the basis after phase one.
    void drive_out_artificials() {
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[i] < width_) continue;
            for (Eigen::Index j = 0; j < width_; ++j) {
                if (std::abs(t_(i, j)) > 1e-9) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    double value() const { return t_(m_, cols_); }
    Eigen::Index n_art() const { return n_art_; }
    Eigen::Index width() const { return width_; }
    Eigen::Index cols() const { return cols_; }

    Vector primal() const {
        Vector full = Vector::Zero(cols_);
        for (Eigen::Index i = 0; i < m_; ++i) full(basis_[i]) = t_(i, cols_);
        return full.segment(0, n_) - full.segment(n_, n_);
    }

private:
    void pivot(Eigen::Index r, Eigen::Index c) {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        basis_[r] = c;
    }

    Eigen::Index m_;
    Eigen::Index n_;
    Eigen::Index width_ = 0;
    Eigen::Index n_art_ = 0;
    Eigen::Index cols_ = 0;
    Matrix t_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace

LpSolution maximize_lp(const Vector& c, const Matrix& A, const Vector& b) {
    if (A.cols() != c.size() || A.rows() != b.size()) throw DimensionMismatch("maximize_lp: shapes differ");
    Tableau tab(A, b);
    if (tab.n_art() > 0) {
        Vector phase1 = Vector::Zero(tab.cols());
        phase1.tail(tab.n_art()).setConstant(-1.0);
        tab.set_objective(phase1);
        tab.optimize(tab.cols());
        const double scale = 1.0 + b.cwiseAbs().maxCoeff();
        if (tab.value() < -1e-9 * scale) throw Infeasible("lp: constraints are infeasible");
        tab.drive_out_artificials();
    }
    Vector cost = Vector::Zero(tab.cols());
    cost.head(c.size()) = c;
    cost.segment(c.size(), c.size()) = -c;
    tab.set_objective(cost);
    if (!tab.optimize(tab.width())) throw Infeasible("lp: objective is unbounded");
    LpSolution sol;
    sol.x = tab.primal();
    sol.objective = c.dot(sol.x);
    return sol;
}

}  // namespace sslice
