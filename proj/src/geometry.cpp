#include "simplex_slice/geometry.hpp"

#include <cmath>
#include <string>

namespace sslice {

namespace {

void require_dim(long got, long want, const char* what) {
    if (got != want) {
        throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(want) +
                                ", got " + std::to_string(got));
    }
}

}  // namespace

bool Barycentric::is_valid(double tol) const {
    if (weights.size() < 2) return false;
    if (std::abs(weights.sum() - 1.0) > tol) return false;
    return weights.minCoeff() >= -tol;
}

AffineMap::AffineMap(Matrix linear, Vector shift) : linear_(std::move(linear)), shift_(std::move(shift)) {
    if (linear_.rows() != linear_.cols() || linear_.rows() != shift_.size()) {
        throw DimensionMismatch("AffineMap: matrix must be square and match the shift");
    }
    lu_.compute(linear_);
    det_abs_ = std::abs(lu_.determinant());
    // Scale-free test on the estimated reciprocal condition number.
    if (!(lu_.rcond() > 1e-13) || !std::isfinite(det_abs_)) {
        throw SingularSimplex("AffineMap: linear part is singular");
    }
}

AffineMap AffineMap::identity(int d) { return AffineMap(Matrix::Identity(d, d), Vector::Zero(d)); }

Vector AffineMap::apply(const Vector& y) const {
    require_dim(y.size(), shift_.size(), "AffineMap::apply");
    return linear_ * y + shift_;
}

Vector AffineMap::apply_inverse(const Vector& x) const {
    require_dim(x.size(), shift_.size(), "AffineMap::apply_inverse");
    return lu_.solve(x - shift_);
}

Vector AffineMap::solve(const Vector& v) const { return lu_.solve(v); }

Matrix AffineMap::inverse_linear() const { return lu_.inverse(); }

namespace {

AffineMap frame_of(const Matrix& vertices) {
    if (vertices.cols() != vertices.rows() + 1 || vertices.rows() < 1) {
        throw DimensionMismatch("Simplex: need d+1 vertices in R^d");
    }
    const Eigen::Index d = vertices.rows();
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) m.col(i) = vertices.col(i + 1) - vertices.col(0);
    return AffineMap(std::move(m), vertices.col(0));
}

}  // namespace

Simplex::Simplex(Matrix vertices) : vertices_(std::move(vertices)), frame_(frame_of(vertices_)) {
    const Eigen::Index d = vertices_.rows();
    Matrix unit = Matrix::Zero(d, d + 1);
    unit.rightCols(d).setIdentity();
    is_unit_ = vertices_ == unit;
}

Simplex Simplex::unit(int d) {
    if (d < 1) throw UsageError("Simplex::unit: dimension must be >= 1");
    Matrix v = Matrix::Zero(d, d + 1);
    v.rightCols(d).setIdentity();
    return Simplex(std::move(v));
}

double Simplex::volume() const {
    double fact = 1.0;
    for (int i = 2; i <= dimension(); ++i) fact *= i;
    return frame_.det_abs() / fact;
}

Vector barycentric_to_cartesian(const Barycentric& lambda, const Simplex& simplex) {
    require_dim(lambda.weights.size(), simplex.dimension() + 1, "barycentric_to_cartesian");
    if (!lambda.is_valid()) throw ContractViolation("barycentric_to_cartesian: weights are not barycentric");
    const int d = simplex.dimension();
    return simplex.frame().apply(lambda.weights.tail(d));
}

Barycentric cartesian_to_barycentric(const Vector& x, const Simplex& simplex) {
    require_dim(x.size(), simplex.dimension(), "cartesian_to_barycentric");
    const int d = simplex.dimension();
    const Vector tail = simplex.frame().apply_inverse(x);
    Barycentric out{Vector(d + 1)};
    out.weights(0) = 1.0 - tail.sum();
    out.weights.tail(d) = tail;
    return out;
}

Vector unit_barycentric(const Vector& x) {
    Vector lambda(x.size() + 1);
    lambda(0) = 1.0 - x.sum();
    lambda.tail(x.size()) = x;
    return lambda;
}

Halfspace::Halfspace(Vector n, double z) : normal(std::move(n)), offset(z) {
    if (normal.size() == 0 || normal.cwiseAbs().maxCoeff() == 0.0) {
        throw DataError("Halfspace: normal must be nonzero");
    }
    if (!std::isfinite(offset) || !normal.allFinite()) throw DataError("Halfspace: non-finite coefficient");
}

HyperplaneFamily::HyperplaneFamily(Vector n, std::vector<double> z) : normal(std::move(n)), offsets(std::move(z)) {
    if (normal.size() == 0 || normal.cwiseAbs().maxCoeff() == 0.0) {
        throw DataError("HyperplaneFamily: normal must be nonzero");
    }
    for (std::size_t i = 1; i < offsets.size(); ++i) {
        if (!(offsets[i] > offsets[i - 1])) throw DataError("HyperplaneFamily: offsets must be strictly increasing");
    }
}

namespace {

void validate_spd(const Matrix& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0) throw DimensionMismatch(std::string(who) + ": matrix must be square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DataError(std::string(who) + ": matrix is not symmetric");
    }
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw DataError(std::string(who) + ": matrix is not positive definite");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
        throw DataError(std::string(who) + ": matrix is not positive definite");
    }
}

}  // namespace

Ellipsoid::Ellipsoid(Matrix matrix, Vector center, double level)
    : matrix_(std::move(matrix)), center_(std::move(center)), level_(level) {
    validate_spd(matrix_, "Ellipsoid");
    require_dim(center_.size(), matrix_.rows(), "Ellipsoid centre");
    if (!(level_ > 0.0) || !std::isfinite(level_)) throw DataError("Ellipsoid: level must be positive");
}

Ellipsoid::Ellipsoid(Matrix matrix, double level)
    : Ellipsoid(matrix, Vector::Zero(matrix.rows()), level) {}

Ellipsoid Ellipsoid::from_quadric(const Quadric& q) {
    validate_spd(q.quad, "Ellipsoid::from_quadric");
    require_dim(q.linear.size(), q.quad.rows(), "Ellipsoid::from_quadric linear term");
    // x^T Q x + g.x + h = (x - c)^T Q (x - c) - (c^T Q c - h), c = -Q^{-1} g / 2.
    const Vector center = -0.5 * q.quad.ldlt().solve(q.linear);
    const double level = center.dot(q.quad * center) - q.constant;
    if (!(level > 0.0)) throw DataError("Ellipsoid::from_quadric: quadric has empty interior");
    return Ellipsoid(q.quad, center, level);
}

double Ellipsoid::value(const Vector& x) const {
    require_dim(x.size(), center_.size(), "Ellipsoid::value");
    const Vector y = x - center_;
    return y.dot(matrix_ * y) - level_;
}

Quadric Ellipsoid::to_quadric() const {
    return Quadric{matrix_, -2.0 * (matrix_ * center_), center_.dot(matrix_ * center_) - level_};
}

std::vector<Halfspace> unit_simplex_halfspaces(int d) {
    std::vector<Halfspace> out;
    out.reserve(d + 1);
    for (int i = 0; i < d; ++i) out.emplace_back(-Vector::Unit(d, i), 0.0);
    out.emplace_back(Vector::Ones(d), 1.0);
    return out;
}

Body::Body(int dimension, std::vector<Halfspace> halfspaces, std::vector<EllipsoidConstraint> ellipsoids)
    : dimension_(dimension), halfspaces_(std::move(halfspaces)), ellipsoids_(std::move(ellipsoids)) {
    if (dimension_ < 1) throw UsageError("Body: dimension must be >= 1");
    for (const auto& h : halfspaces_) require_dim(h.dimension(), dimension_, "Body halfspace");
    int outside = 0;
    for (const auto& e : ellipsoids_) {
        require_dim(e.ellipsoid.dimension(), dimension_, "Body ellipsoid");
        if (e.side == Side::outside) ++outside;
    }
    convex_ = outside == 0;
    if (convex_) return;

    // Shell form only.
    if (outside != 1 || ellipsoids_.size() != 2) {
        throw DataError("Body: a non-convex body must be a shell of exactly two concentric ellipsoids");
    }
    const auto& a = ellipsoids_[0];
    const auto& b = ellipsoids_[1];
    const auto& inner = a.side == Side::outside ? a.ellipsoid : b.ellipsoid;
    const auto& outer = a.side == Side::outside ? b.ellipsoid : a.ellipsoid;
    const double scale = std::max(1.0, outer.matrix().cwiseAbs().maxCoeff());
    if ((inner.matrix() - outer.matrix()).cwiseAbs().maxCoeff() > 1e-12 * scale ||
        (inner.center() - outer.center()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, outer.center().norm())) {
        throw DataError("Body: shell ellipsoids must share one quadratic form and centre");
    }
    if (!(inner.level() < outer.level())) throw DataError("Body: shell inner level must be below the outer level");
    if (halfspaces_.size() > 2) throw DataError("Body: a shell admits at most one pair of parallel halfspaces");
    if (halfspaces_.size() == 2) {
        const Vector& n0 = halfspaces_[0].normal;
        const Vector& n1 = halfspaces_[1].normal;
        const double cosine = n0.dot(n1) / (n0.norm() * n1.norm());
        if (std::abs(std::abs(cosine) - 1.0) > 1e-9) throw DataError("Body: shell halfspaces must be parallel");
    }
}

std::vector<Halfspace> Body::all_halfspaces() const {
    auto out = unit_simplex_halfspaces(dimension_);
    out.insert(out.end(), halfspaces_.begin(), halfspaces_.end());
    return out;
}

bool Body::contains(const Vector& x, double tol) const {
    if (x.size() != dimension_) throw DimensionMismatch("Body::contains: point has wrong dimension");
    if (x.minCoeff() < -tol || x.sum() > 1.0 + tol) return false;
    for (const auto& h : halfspaces_) {
        if (!h.contains(x, tol)) return false;
    }
    for (const auto& e : ellipsoids_) {
        if (!e.satisfied(x, tol)) return false;
    }
    return true;
}

bool contains(const Body& body, const Vector& x, double tol) { return body.contains(x, tol); }

StandardizedBody standardize(const Simplex& simplex, const std::vector<Halfspace>& halfspaces,
                             const std::vector<EllipsoidConstraint>& ellipsoids) {
    const int d = simplex.dimension();
    const AffineMap& frame = simplex.frame();
    const Matrix& m = frame.linear();
    const Vector& v0 = frame.shift();

    std::vector<Halfspace> mapped_h;
    mapped_h.reserve(halfspaces.size());
    for (const auto& h : halfspaces) {
        require_dim(h.dimension(), d, "standardize halfspace");
        // a.(M y + v0) <= z  <=>  (M^T a).y <= z - a.v0
        mapped_h.emplace_back(m.transpose() * h.normal, h.offset - h.normal.dot(v0));
    }

    std::vector<EllipsoidConstraint> mapped_e;
    mapped_e.reserve(ellipsoids.size());
    for (const auto& e : ellipsoids) {
        const Ellipsoid& el = e.ellipsoid;
        require_dim(el.dimension(), d, "standardize ellipsoid");
        Matrix q = m.transpose() * el.matrix() * m;
        q = 0.5 * (q + q.transpose());
        mapped_e.push_back({Ellipsoid(std::move(q), frame.apply_inverse(el.center()), el.level()), e.side});
    }

    return StandardizedBody{Body(d, std::move(mapped_h), std::move(mapped_e)), frame.det_abs(), frame};
}

Ellipsoid restrict_ellipsoid(const Ellipsoid& full, const Simplex& simplex) {
    const int d = simplex.dimension();
    require_dim(full.dimension(), d + 1, "restrict_ellipsoid");
    if (full.center().cwiseAbs().maxCoeff() != 0.0) {
        throw ContractViolation("restrict_ellipsoid: the (d+1)-dimensional ellipsoid must be centred at the origin");
    }
    const Matrix& c = full.matrix();
    const Vector& v0 = simplex.frame().shift();

    // lambda = E M^{-1} (x - v0) + e0 with E = [-1^T; I_d].
    Matrix e = Matrix::Zero(d + 1, d);
    e.row(0).setConstant(-1.0);
    e.bottomRows(d).setIdentity();
    const Matrix p = e * simplex.frame().inverse_linear();

    Matrix q = p.transpose() * c * p;
    q = 0.5 * (q + q.transpose());
    const Vector g_shifted = 2.0 * (p.transpose() * c.col(0));
    const double h_shifted = c(0, 0) - full.level();

    // Expand around x instead of x - v0.
    Quadric restricted{q, g_shifted - 2.0 * (q * v0), h_shifted - g_shifted.dot(v0) + v0.dot(q * v0)};
    Ellipsoid out = Ellipsoid::from_quadric(restricted);
    out.set_restricted_form(std::move(restricted));
    return out;
}

}  // namespace sslice
