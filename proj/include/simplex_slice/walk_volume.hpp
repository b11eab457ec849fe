#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simplex_slice/geometry.hpp"

namespace sslice {

struct Ball {
    Vector center;
    double radius = 0.0;
};

struct WalkConfig {
    double epsilon = 0.5;
    /// Steps between recorded points; 0 selects ceil(ln d) + 10.
    int walk_length = 0;
    /// Points per phase; 0 selects ceil(400 d ln d / epsilon^2).
    std::uint64_t points_per_phase = 0;
    std::uint64_t seed = 1;
    int max_dimension_nonconvex = 35;
    bool allow_nonconvex_high_d = false;
    /// Simplex points drawn while looking for an interior point of a shell.
    std::uint64_t interior_sample_budget = 10'000'000;
    /// Worker threads for the independent chains (results do not depend on it).
    int threads = 1;
};

std::uint64_t default_points_per_phase(int d, double epsilon);
int default_walk_length(int d);

struct Chord {
    double minus = 0.0;
    double plus = 0.0;
};

/// Chord of `body` through p along e_k: the largest negative and smallest
/// positive boundary parameters. For an outside-ellipsoid constraint the
/// chord stops at the excluded core only when the line meets it.
/// Throws ContractViolation when p is not inside the body.
Chord ray_body_intersection(const Vector& p, int k, const Body& body);

/// Largest ball inside { x : A x <= b } (rows are halfspaces) via the LP
/// max r s.t. a_i.x + r |a_i| <= b_i.
Ball chebyshev_ball(const Matrix& A, const Vector& b);

/// Chebyshev ball of the unit simplex intersected with `halfspaces`.
Ball chebyshev_ball_polytope(int d, const std::vector<Halfspace>& halfspaces);

struct SocpOptions {
    double tolerance = 1e-9;
    int max_iterations = 2000;
};

/// Largest ball inside { A x <= b } ∩ `outer`:
/// max r s.t. a_i.x + r |a_i| <= b_i, |x - outer.center| <= outer.radius - r.
/// The cone is handled by tangent cutting planes around the LP relaxation;
/// the returned ball is feasible and its radius is within `tolerance`
/// (relative to the outer radius) of the optimum.
Ball inscribed_ball_socp(const Matrix& A, const Vector& b, const Ball& outer, const SocpOptions& options = {});

/// Initial ball for a convex body with at most one inside ellipsoid: the
/// polytope's Chebyshev ball when the ellipsoid does not cut it, otherwise the
/// SOCP ball in the frame where the ellipsoid is the unit sphere, mapped back
/// and shrunk by the ellipsoid's eccentricity. Falls back to shrink_ball_init.
Ball inscribed_ball_for_ellipsoid_body(const Body& body, std::uint64_t seed = 1);

/// Bisection (40 steps) on the radius of a ball centred at `interior_point`;
/// a radius is accepted when the linear constraints are exactly at distance
/// and probes (axis points, random directions and 100 hit-and-run chords)
/// see only the sphere. Throws NumericalFailure below radius 1e-12.
Ball shrink_ball_init(const Body& body, const Vector& interior_point, std::uint64_t seed = 1);

struct VolumeEstimate {
    double value = 0.0;
    std::string method;
    Ball inscribed;
    double enclosing_radius = 0.0;
    /// vol(K_{i-1}) / vol(K_i) per phase, innermost first.
    std::vector<double> phase_ratios;
    std::uint64_t points_per_phase = 0;
    int walk_length = 0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t total_steps = 0;
    /// Some phase counted no point in the inner ball.
    bool zero_ratio = false;
    /// No interior point was found (volume reported as 0).
    bool empty = false;
    bool experimental = false;
};

/// Multiphase hit-and-run estimate for a convex body: balls of radii
/// r 2^{i/d} from the inscribed radius up to the enclosing radius; each phase
/// walks every point W coordinate steps in body ∩ B_i and counts the fraction
/// inside B_{i-1}.
VolumeEstimate volume_hnr(const Body& body, const WalkConfig& cfg);

/// As volume_hnr with an explicit initial ball.
VolumeEstimate volume_hnr(const Body& body, const Ball& inscribed, const WalkConfig& cfg);

/// Shell bodies: interior point by simplex sampling, shrink_ball_init, then
/// the multiphase scheme with chords restricted to the current component.
VolumeEstimate volume_nonconvex(const Body& body, const WalkConfig& cfg);

}  // namespace sslice
