#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "simplex_slice/errors.hpp"

namespace sslice {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Slack used by every membership test on bodies.
inline constexpr double kMembershipSlack = 1e-9;

/// Barycentric weights (lambda_0, ..., lambda_d) with respect to a simplex.
/// All d+1 entries are stored; lambda_0 is never implied.
struct Barycentric {
    Vector weights;

    int dimension() const { return static_cast<int>(weights.size()) - 1; }
    bool is_valid(double tol = 1e-12) const;
};

/// x -> linear * x + shift, with the factorization of `linear` cached.
class AffineMap {
public:
    AffineMap(Matrix linear, Vector shift);

    static AffineMap identity(int d);

    int dimension() const { return static_cast<int>(shift_.size()); }
    const Matrix& linear() const { return linear_; }
    const Vector& shift() const { return shift_; }
    double det_abs() const { return det_abs_; }

    Vector apply(const Vector& y) const;
    Vector apply_inverse(const Vector& x) const;
    /// linear^{-1} * v, without the shift.
    Vector solve(const Vector& v) const;
    Matrix inverse_linear() const;

private:
    Matrix linear_;
    Vector shift_;
    Eigen::PartialPivLU<Matrix> lu_;
    double det_abs_ = 0.0;
};

/// A d-simplex given by d+1 affinely independent vertices in R^d.
class Simplex {
public:
    /// `vertices` holds v_0, ..., v_d as columns (d x (d+1)).
    explicit Simplex(Matrix vertices);

    static Simplex unit(int d);

    int dimension() const { return static_cast<int>(vertices_.rows()); }
    const Matrix& vertices() const { return vertices_; }
    Vector vertex(int i) const { return vertices_.col(i); }
    bool is_unit() const { return is_unit_; }
    double volume() const;

    /// m_bc viewed as an affine map of R^d: unit-frame point y -> M y + v_0.
    const AffineMap& frame() const { return frame_; }

private:
    Matrix vertices_;
    AffineMap frame_;
    bool is_unit_ = false;
};

Vector barycentric_to_cartesian(const Barycentric& lambda, const Simplex& simplex);
Barycentric cartesian_to_barycentric(const Vector& x, const Simplex& simplex);

/// { x : normal . x <= offset }.
struct Halfspace {
    Halfspace(Vector normal, double offset);

    Vector normal;
    double offset;

    int dimension() const { return static_cast<int>(normal.size()); }
    double slack(const Vector& x) const { return offset - normal.dot(x); }
    bool contains(const Vector& x, double tol = kMembershipSlack) const { return slack(x) >= -tol; }
};

/// Parallel hyperplanes normal . x = offsets[i], offsets strictly increasing.
struct HyperplaneFamily {
    HyperplaneFamily(Vector normal, std::vector<double> offsets);

    Vector normal;
    std::vector<double> offsets;
};

/// General quadric x^T Q x + linear . x + constant (<= 0 means inside).
struct Quadric {
    Matrix quad;
    Vector linear;
    double constant = 0.0;

    double evaluate(const Vector& x) const { return x.dot(quad * x) + linear.dot(x) + constant; }
};

/// { x : (x - center)^T matrix (x - center) <= level }, matrix SPD.
class Ellipsoid {
public:
    Ellipsoid(Matrix matrix, Vector center, double level);
    /// Centred at the origin.
    Ellipsoid(Matrix matrix, double level);

    /// Converts x^T Q x + g.x + h <= 0 into centre form. Q must be SPD and the
    /// resulting level positive.
    static Ellipsoid from_quadric(const Quadric& q);

    int dimension() const { return static_cast<int>(center_.size()); }
    const Matrix& matrix() const { return matrix_; }
    const Vector& center() const { return center_; }
    double level() const { return level_; }

    /// (x - c)^T Q (x - c) - level; <= 0 inside.
    double value(const Vector& x) const;
    bool contains(const Vector& x, double tol = kMembershipSlack) const { return value(x) <= tol; }

    Quadric to_quadric() const;

    /// Linear/constant terms kept when the ellipsoid came from restricting a
    /// (d+1)-dimensional quadratic form to a simplex.
    const std::optional<Quadric>& restricted_form() const { return restricted_; }
    void set_restricted_form(Quadric q) { restricted_ = std::move(q); }

private:
    Matrix matrix_;
    Vector center_;
    double level_;
    std::optional<Quadric> restricted_;
};

enum class Side { inside, outside };

struct EllipsoidConstraint {
    Ellipsoid ellipsoid;
    Side side = Side::inside;

    bool satisfied(const Vector& x, double tol = kMembershipSlack) const {
        const double v = ellipsoid.value(x);
        return side == Side::inside ? v <= tol : v >= -tol;
    }
};

/// Unit d-simplex intersected with halfspaces and ellipsoid constraints.
///
/// Convex iff no constraint keeps the outside of an ellipsoid. The only
/// non-convex form accepted is a shell: one outside ellipsoid sharing its
/// matrix and centre with an inside ellipsoid of larger level, plus at most
/// a pair of parallel halfspaces.
class Body {
public:
    Body(int dimension, std::vector<Halfspace> halfspaces = {},
         std::vector<EllipsoidConstraint> ellipsoids = {});

    static Body unit_simplex(int d) { return Body(d); }

    int dimension() const { return dimension_; }
    const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
    const std::vector<EllipsoidConstraint>& ellipsoids() const { return ellipsoids_; }
    bool is_convex() const { return convex_; }

    /// Halfspaces of the unit simplex followed by the extra halfspaces.
    std::vector<Halfspace> all_halfspaces() const;

    bool contains(const Vector& x, double tol = kMembershipSlack) const;

private:
    int dimension_;
    std::vector<Halfspace> halfspaces_;
    std::vector<EllipsoidConstraint> ellipsoids_;
    bool convex_ = true;
};

/// -x_i <= 0 for i = 1..d and sum x_i <= 1.
std::vector<Halfspace> unit_simplex_halfspaces(int d);

bool contains(const Body& body, const Vector& x, double tol = kMembershipSlack);

struct StandardizedBody {
    Body body;
    /// vol(original region) = scale * vol(unit-frame region).
    double scale;
    /// Unit frame -> original coordinates.
    AffineMap map;
};

/// Rewrites constraints on an arbitrary simplex in the unit-simplex frame
/// y = M^{-1}(x - v_0).
StandardizedBody standardize(const Simplex& simplex, const std::vector<Halfspace>& halfspaces,
                             const std::vector<EllipsoidConstraint>& ellipsoids);

/// Restricts lambda^T C lambda <= c, C SPD of size d+1 and centred at the
/// origin, to the affine hull of `simplex` expressed in its Cartesian
/// coordinates. With P = [-1^T; I] M^{-1}, the constraint becomes
/// (x-v_0)^T P^T C P (x-v_0) + 2 e_0^T C P (x-v_0) + C_00 - c <= 0; the
/// returned ellipsoid keeps that quadric (expanded in x) as its restricted form.
Ellipsoid restrict_ellipsoid(const Ellipsoid& full, const Simplex& simplex);

/// The barycentric coordinates of a unit-frame point: (1 - sum x, x).
Vector unit_barycentric(const Vector& x);

}  // namespace sslice
