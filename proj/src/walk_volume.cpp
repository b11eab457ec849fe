#include "simplex_slice/walk_volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "simplex_slice/lp.hpp"
#include "simplex_slice/rng.hpp"
#include "simplex_slice/sampling.hpp"

namespace sslice {

std::uint64_t default_points_per_phase(int d, double epsilon) {
    if (d < 1) throw UsageError("walk: dimension must be >= 1");
    if (!(epsilon > 0.0)) throw UsageError("walk: epsilon must be positive");
    const double logd = std::max(std::log(static_cast<double>(d)), 1.0);
    return static_cast<std::uint64_t>(std::ceil(400.0 * d * logd / (epsilon * epsilon)));
}

int default_walk_length(int d) {
    return static_cast<int>(std::ceil(std::log(static_cast<double>(std::max(d, 1))))) + 10;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Constraint data laid out for O(d) coordinate steps.
struct WalkBody {
    struct Quad {
        Matrix q;
        Vector center;
        double level;
        Side side;
    };

    explicit WalkBody(const Body& body) : d(body.dimension()) {
        const auto& hs = body.halfspaces();
        a.resize(static_cast<Eigen::Index>(hs.size()), d);
        b.resize(static_cast<Eigen::Index>(hs.size()));
        for (std::size_t i = 0; i < hs.size(); ++i) {
            a.row(static_cast<Eigen::Index>(i)) = hs[i].normal.transpose();
            b(static_cast<Eigen::Index>(i)) = hs[i].offset;
        }
        for (const auto& e : body.ellipsoids()) {
            quads.push_back({e.ellipsoid.matrix(), e.ellipsoid.center(), e.ellipsoid.level(), e.side});
        }
    }

    int d;
    Matrix a;  // extra halfspaces, one per row
    Vector b;
    std::vector<Quad> quads;
};

/// Cached slacks of one chain; updated in O(d) per step.
struct ChainState {
    Vector x;
    double sum = 0.0;
    Vector slack;
    std::vector<Vector> w;     // Q (x - center) per ellipsoid
    std::vector<double> val;   // (x - c)^T Q (x - c) - level
    double dist2 = 0.0;        // |x - ball centre|^2

    void reset(const WalkBody& body, const Vector& ball_center) {
        sum = x.sum();
        slack = body.b - body.a * x;
        w.resize(body.quads.size());
        val.resize(body.quads.size());
        for (std::size_t e = 0; e < body.quads.size(); ++e) {
            const auto& qd = body.quads[e];
            const Vector y = x - qd.center;
            w[e] = qd.q * y;
            val[e] = y.dot(w[e]) - qd.level;
        }
        dist2 = (x - ball_center).squaredNorm();
    }
};

/// Roots of q t^2 + 2 b t + c = 0 (q > 0) in increasing order; false when
/// there is no real root.
bool quadratic_roots(double q, double b, double c, double& r1, double& r2) {
    const double disc = b * b - q * c;
    if (disc < 0.0) return false;
    const double sq = std::sqrt(disc);
    const double t = -(b + std::copysign(sq, b));
    if (t == 0.0) {
        r1 = r2 = 0.0;
        return true;
    }
    const double u = t / q;
    const double v = c / t;
    r1 = std::min(u, v);
    r2 = std::max(u, v);
    return true;
}

Chord chord_of(const WalkBody& body, const ChainState& s, int k, const Vector& ball_center, double ball_r2) {
    double lo = -s.x(k);
    double hi = 1.0 - s.sum;
    for (Eigen::Index i = 0; i < body.a.rows(); ++i) {
        const double ak = body.a(i, k);
        if (ak > 0.0) {
            hi = std::min(hi, s.slack(i) / ak);
        } else if (ak < 0.0) {
            lo = std::max(lo, s.slack(i) / ak);
        }
    }
    for (std::size_t e = 0; e < body.quads.size(); ++e) {
        const auto& qd = body.quads[e];
        double r1;
        double r2;
        if (!quadratic_roots(qd.q(k, k), s.w[e](k), s.val[e], r1, r2)) continue;
        if (qd.side == Side::inside) {
            lo = std::max(lo, std::min(r1, 0.0));
            hi = std::min(hi, std::max(r2, 0.0));
        } else if (r1 > 0.0) {
            hi = std::min(hi, r1);
        } else if (r2 < 0.0) {
            lo = std::max(lo, r2);
        }
    }
    if (ball_r2 < kInf) {
        const double yk = s.x(k) - ball_center(k);
        const double rest = std::max(ball_r2 - (s.dist2 - yk * yk), 0.0);
        const double sq = std::sqrt(rest);
        lo = std::max(lo, -yk - sq);
        hi = std::min(hi, -yk + sq);
    }
    return {std::min(lo, 0.0), std::max(hi, 0.0)};
}

void step(const WalkBody& body, ChainState& s, int k, double lambda, const Vector& ball_center) {
    const double yk = s.x(k) - ball_center(k);
    s.x(k) += lambda;
    s.sum += lambda;
    if (body.a.rows() > 0) s.slack.noalias() -= lambda * body.a.col(k);
    for (std::size_t e = 0; e < body.quads.size(); ++e) {
        const auto& qd = body.quads[e];
        s.val[e] += lambda * (2.0 * s.w[e](k) + lambda * qd.q(k, k));
        s.w[e].noalias() += lambda * qd.q.col(k);
    }
    s.dist2 += lambda * (2.0 * yk + lambda);
}

double max_vertex_distance(const Vector& c) {
    const double c2 = c.squaredNorm();
    double best = c2;
    for (Eigen::Index i = 0; i < c.size(); ++i) best = std::max(best, c2 - 2.0 * c(i) + 1.0);
    return std::sqrt(best);
}

void check_inside(const Body& body, const Vector& p, const char* who) {
    if (p.size() != body.dimension()) throw DimensionMismatch(std::string(who) + ": point dimension differs");
    if (!body.contains(p)) throw ContractViolation(std::string(who) + ": point is not inside the body");
}

Vector row_norms(const Matrix& a) {
    Vector n(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) n(i) = a.row(i).norm();
    return n;
}

void halfspaces_to_rows(const std::vector<Halfspace>& hs, Matrix& a, Vector& b) {
    const int d = hs.empty() ? 0 : hs.front().dimension();
    a.resize(static_cast<Eigen::Index>(hs.size()), d);
    b.resize(static_cast<Eigen::Index>(hs.size()));
    for (std::size_t i = 0; i < hs.size(); ++i) {
        a.row(static_cast<Eigen::Index>(i)) = hs[i].normal.transpose();
        b(static_cast<Eigen::Index>(i)) = hs[i].offset;
    }
}

double max_eigenvalue(const Matrix& q) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

}  // namespace

Chord ray_body_intersection(const Vector& p, int k, const Body& body) {
    check_inside(body, p, "ray_body_intersection");
    if (k < 0 || k >= body.dimension()) throw UsageError("ray_body_intersection: coordinate out of range");
    WalkBody wb(body);
    ChainState s;
    s.x = p;
    s.reset(wb, p);
    return chord_of(wb, s, k, p, kInf);
}

// ---------------------------------------------------------------------------
// Inscribed balls

Ball chebyshev_ball(const Matrix& A, const Vector& b) {
    const Eigen::Index m = A.rows();
    const Eigen::Index d = A.cols();
    Matrix lp(m + 1, d + 1);
    Vector rhs(m + 1);
    lp.topLeftCorner(m, d) = A;
    lp.topRightCorner(m, 1) = row_norms(A);
    rhs.head(m) = b;
    lp.row(m).setZero();
    lp(m, d) = -1.0;
    rhs(m) = 0.0;
    Vector c = Vector::Zero(d + 1);
    c(d) = 1.0;
    const auto sol = maximize_lp(c, lp, rhs);
    Ball ball{sol.x.head(d), sol.x(d)};
    if (!(ball.radius > 0.0)) throw Infeasible("chebyshev_ball: polytope has empty interior");
    return ball;
}

Ball chebyshev_ball_polytope(int d, const std::vector<Halfspace>& halfspaces) {
    auto all = unit_simplex_halfspaces(d);
    for (const auto& h : halfspaces) {
        if (h.dimension() != d) throw DimensionMismatch("chebyshev_ball_polytope: halfspace dimension differs");
        all.push_back(h);
    }
    Matrix a;
    Vector b;
    halfspaces_to_rows(all, a, b);
    return chebyshev_ball(a, b);
}

Ball inscribed_ball_socp(const Matrix& A, const Vector& b, const Ball& outer, const SocpOptions& options) {
    const Eigen::Index m = A.rows();
    const Eigen::Index d = A.cols();
    if (outer.center.size() != d) throw DimensionMismatch("inscribed_ball_socp: ball dimension differs");
    if (!(outer.radius > 0.0)) throw UsageError("inscribed_ball_socp: outer radius must be positive");

    // Rows: polytope, r >= 0, then cuts u.(x - x') + r <= r'.
    std::vector<Vector> cuts;
    for (Eigen::Index j = 0; j < d; ++j) {
        Vector u = Vector::Zero(d);
        u(j) = 1.0;
        cuts.push_back(u);
        cuts.push_back(-u);
    }
    const Vector norms = row_norms(A);
    Vector c = Vector::Zero(d + 1);
    c(d) = 1.0;

    Ball best{outer.center, -1.0};
    for (int it = 0; it < options.max_iterations; ++it) {
        const Eigen::Index rows = m + 1 + static_cast<Eigen::Index>(cuts.size());
        Matrix lp = Matrix::Zero(rows, d + 1);
        Vector rhs(rows);
        lp.topLeftCorner(m, d) = A;
        lp.topRightCorner(m, 1) = norms;
        rhs.head(m) = b;
        lp(m, d) = -1.0;
        rhs(m) = 0.0;
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            const Eigen::Index r = m + 1 + static_cast<Eigen::Index>(i);
            lp.row(r).head(d) = cuts[i].transpose();
            lp(r, d) = 1.0;
            rhs(r) = outer.radius + cuts[i].dot(outer.center);
        }
        const auto sol = maximize_lp(c, lp, rhs);
        const Vector x = sol.x.head(d);
        const double upper = sol.x(d);
        const double dist = (x - outer.center).norm();
        const double feasible = std::min(upper, outer.radius - dist);
        if (feasible > best.radius) best = {x, feasible};
        if (upper - best.radius <= options.tolerance * outer.radius) break;
        cuts.push_back((x - outer.center) / dist);
    }
    if (!(best.radius > 0.0)) throw Infeasible("inscribed_ball_socp: intersection has empty interior");
    return best;
}

namespace {

/// Sufficient test that the ball B(p, r) respects an ellipsoid constraint:
/// sqrt((p-c)^T Q (p-c)) +- r sqrt(lambda_max) against sqrt(level).
bool ball_respects(const EllipsoidConstraint& ec, double sqrt_lmax, const Vector& p, double r) {
    const Vector y = p - ec.ellipsoid.center();
    const double norm_q = std::sqrt(std::max(y.dot(ec.ellipsoid.matrix() * y), 0.0));
    const double root = std::sqrt(ec.ellipsoid.level());
    if (ec.side == Side::inside) return norm_q + r * sqrt_lmax <= root;
    return norm_q - r * sqrt_lmax >= root;
}

class InscribedTest {
public:
    InscribedTest(const Body& body, const Vector& center, std::uint64_t seed)
        : body_(body), walk_(body), center_(center), seed_(seed) {
        for (const auto& h : body.all_halfspaces()) {
            linear_dist_.push_back(h.slack(center) / h.normal.norm());
        }
        for (const auto& e : body.ellipsoids()) sqrt_lmax_.push_back(std::sqrt(max_eigenvalue(e.ellipsoid.matrix())));
    }

    bool operator()(double r) const {
        for (double dist : linear_dist_) {
            if (dist < r) return false;
        }
        bool need_probes = false;
        for (std::size_t e = 0; e < body_.ellipsoids().size(); ++e) {
            if (!ball_respects(body_.ellipsoids()[e], sqrt_lmax_[e], center_, r)) need_probes = true;
        }
        return !need_probes || probes_pass(r);
    }

private:
    bool satisfied(const Vector& x) const {
        for (const auto& ec : body_.ellipsoids()) {
            if (!ec.satisfied(x, 0.0)) return false;
        }
        return true;
    }

    bool probes_pass(double r) const {
        const int d = body_.dimension();
        RandomStream rng(seed_, 0x5eedba11);
        Vector x = center_;
        for (int k = 0; k < d; ++k) {
            for (double sgn : {-1.0, 1.0}) {
                x(k) = center_(k) + sgn * r;
                if (!satisfied(x)) return false;
            }
            x(k) = center_(k);
        }
        Vector u(d);
        for (int t = 0; t < 100; ++t) {
            for (int k = 0; k < d; ++k) u(k) = rng.normal();
            x = center_ + (r / u.norm()) * u;
            if (!satisfied(x)) return false;
        }
        // Hit-and-run inside the ball: every chord must end on the sphere.
        ChainState s;
        s.x = center_;
        s.reset(walk_, center_);
        const double r2 = r * r;
        for (int t = 0; t < 100; ++t) {
            const int k = static_cast<int>(rng.index(static_cast<std::uint64_t>(d)));
            const Chord sphere = chord_of(walk_, s, k, center_, r2);
            const double yk = s.x(k) - center_(k);
            const double half = std::sqrt(std::max(r2 - (s.dist2 - yk * yk), 0.0));
            const double tol = 1e-12 * std::max(r, 1e-300);
            if (sphere.minus > -yk - half + tol || sphere.plus < -yk + half - tol) return false;
            step(walk_, s, k, sphere.minus + (sphere.plus - sphere.minus) * rng.uniform(), center_);
        }
        return true;
    }

    const Body& body_;
    WalkBody walk_;
    Vector center_;
    std::uint64_t seed_;
    std::vector<double> linear_dist_;
    std::vector<double> sqrt_lmax_;
};

}  // namespace

Ball shrink_ball_init(const Body& body, const Vector& interior_point, std::uint64_t seed) {
    check_inside(body, interior_point, "shrink_ball_init");
    const InscribedTest inscribed(body, interior_point, seed);
    double lo = 0.0;
    double hi = max_vertex_distance(interior_point);
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (inscribed(mid) ? lo : hi) = mid;
    }
    if (lo < 1e-12) throw NumericalFailure("shrink_ball_init: radius fell below 1e-12");
    return {interior_point, lo};
}

Ball inscribed_ball_for_ellipsoid_body(const Body& body, std::uint64_t seed) {
    if (!body.is_convex()) throw UsageError("inscribed_ball_for_ellipsoid_body: body is not convex");
    if (body.ellipsoids().size() > 1) throw UsageError("inscribed_ball_for_ellipsoid_body: at most one ellipsoid");
    const int d = body.dimension();
    const Ball cheb = chebyshev_ball_polytope(d, body.halfspaces());
    if (body.ellipsoids().empty()) return cheb;

    const auto& ec = body.ellipsoids().front();
    const auto& ell = ec.ellipsoid;
    const double sqrt_lmax = std::sqrt(max_eigenvalue(ell.matrix()));
    if (ball_respects(ec, sqrt_lmax, cheb.center, cheb.radius)) return cheb;

    // y = L^T (x - c) / sqrt(level) maps the ellipsoid onto the unit ball.
    const Eigen::LLT<Matrix> llt(ell.matrix());
    const Matrix lower = llt.matrixL();
    const double root = std::sqrt(ell.level());
    Matrix a;
    Vector b;
    auto all = body.all_halfspaces();
    halfspaces_to_rows(all, a, b);
    const Matrix a_y = root * lower.triangularView<Eigen::Lower>().solve(a.transpose()).transpose();
    const Vector b_y = b - a * ell.center();

    try {
        SocpOptions opts;
        opts.tolerance = 1e-4;
        opts.max_iterations = 400;
        const Ball yb = inscribed_ball_socp(a_y, b_y, Ball{Vector::Zero(d), 1.0}, opts);
        const Vector x_c = ell.center() + root * lower.transpose().triangularView<Eigen::Upper>().solve(yb.center);
        Ball ball{x_c, yb.radius * root / sqrt_lmax};
        if (body.contains(ball.center, 0.0) && InscribedTest(body, ball.center, seed)(ball.radius)) return ball;
    } catch (const Infeasible&) {
        // fall through to the heuristic below
    }
    Vector start = cheb.center;
    if (!body.contains(start, 0.0)) start = ell.center();
    if (!body.contains(start, 0.0)) throw Infeasible("inscribed_ball_for_ellipsoid_body: no interior point found");
    return shrink_ball_init(body, start, seed);
}

// ---------------------------------------------------------------------------
// Multiphase estimator

namespace {

constexpr std::uint64_t kChunks = 64;

template <class Fn>
void for_each_chunk(int threads, Fn&& fn) {
    const int workers = std::clamp(threads, 1, static_cast<int>(kChunks));
    if (workers == 1) {
        for (std::uint64_t c = 0; c < kChunks; ++c) fn(c);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::uint64_t c = static_cast<std::uint64_t>(w); c < kChunks; c += static_cast<std::uint64_t>(workers)) {
                fn(c);
            }
        });
    }
    for (auto& t : pool) t.join();
}

double log_ball_volume(int d, double r) {
    const double half = 0.5 * d;
    return half * std::log(M_PI) - std::lgamma(half + 1.0) + d * std::log(r);
}

VolumeEstimate multiphase(const Body& body, const Ball& ball, const WalkConfig& cfg) {
    const int d = body.dimension();
    if (ball.center.size() != d) throw DimensionMismatch("volume_hnr: ball dimension differs");
    if (!(ball.radius > 0.0)) throw UsageError("volume_hnr: inscribed radius must be positive");
    check_inside(body, ball.center, "volume_hnr");

    VolumeEstimate est;
    est.inscribed = ball;
    est.epsilon = cfg.epsilon;
    est.seed = cfg.seed;
    est.walk_length = cfg.walk_length > 0 ? cfg.walk_length : default_walk_length(d);
    est.points_per_phase = cfg.points_per_phase > 0 ? cfg.points_per_phase : default_points_per_phase(d, cfg.epsilon);
    est.enclosing_radius = max_vertex_distance(ball.center);

    const double r0 = ball.radius;
    const double big_r = est.enclosing_radius;
    const int phases = big_r > r0 ? static_cast<int>(std::ceil(d * std::log2(big_r / r0))) : 1;
    std::vector<double> radii(phases + 1);
    for (int i = 0; i <= phases; ++i) radii[i] = std::min(r0 * std::exp2(static_cast<double>(i) / d), big_r);
    radii[0] = r0;

    const WalkBody walk(body);
    const std::uint64_t n = est.points_per_phase;
    // One persistent chain per chunk; chunk c records points [n c / 64, n (c+1) / 64).
    std::vector<ChainState> chains(kChunks);
    std::vector<RandomStream> streams;
    streams.reserve(kChunks);
    for (std::uint64_t c = 0; c < kChunks; ++c) streams.emplace_back(cfg.seed, 0x100 + c);
    auto chunk_size = [n](std::uint64_t c) { return n * (c + 1) / kChunks - n * c / kChunks; };

    // Chains start at uniform points of the inscribed ball.
    for (std::uint64_t c = 0; c < kChunks; ++c) {
        auto& rng = streams[c];
        Vector u(d);
        for (int k = 0; k < d; ++k) u(k) = rng.normal();
        const double scale = r0 * std::pow(rng.uniform_open(), 1.0 / d) / u.norm();
        chains[c].x = ball.center + scale * u;
        chains[c].reset(walk, ball.center);
    }

    const int w = est.walk_length;
    double log_ratio_sum = 0.0;
    std::vector<std::uint64_t> hits(kChunks);
    for (int i = 1; i <= phases; ++i) {
        const double outer2 = i == phases ? kInf : radii[i] * radii[i];
        const double inner2 = radii[i - 1] * radii[i - 1];
        for_each_chunk(cfg.threads, [&](std::uint64_t c) {
            auto& rng = streams[c];
            auto& s = chains[c];
            s.reset(walk, ball.center);
            std::uint64_t count = 0;
            const std::uint64_t records = chunk_size(c);
            for (std::uint64_t j = 0; j < records; ++j) {
                for (int t = 0; t < w; ++t) {
                    const int k = static_cast<int>(rng.index(static_cast<std::uint64_t>(d)));
                    const Chord ch = chord_of(walk, s, k, ball.center, outer2);
                    step(walk, s, k, ch.minus + (ch.plus - ch.minus) * rng.uniform(), ball.center);
                }
                if (s.dist2 <= inner2) ++count;
            }
            hits[c] = count;
        });
        std::uint64_t total = 0;
        for (auto h : hits) total += h;
        const double ratio = static_cast<double>(total) / static_cast<double>(n);
        est.phase_ratios.push_back(ratio);
        if (total == 0) {
            est.zero_ratio = true;
        } else {
            log_ratio_sum += std::log(ratio);
        }
    }
    est.total_steps = static_cast<std::uint64_t>(phases) * n * static_cast<std::uint64_t>(w);
    est.value = std::exp(log_ball_volume(d, r0) - log_ratio_sum);
    return est;
}

}  // namespace

VolumeEstimate volume_hnr(const Body& body, const Ball& inscribed, const WalkConfig& cfg) {
    auto est = multiphase(body, inscribed, cfg);
    est.method = body.is_convex() ? "hnr" : "hnr-nonconvex";
    est.experimental = !body.is_convex();
    return est;
}

namespace {

/// Up to `want` points of the body found by uniform simplex sampling.
std::vector<Vector> sample_interior_points(const Body& body, std::uint64_t budget, std::uint64_t seed, int want) {
    SamplerConfig sc;
    sc.dimension = body.dimension();
    sc.seed = seed;
    sc.stream = 0xface;
    UnitSimplexSampler sampler(sc);
    std::vector<Vector> found;
    Vector x(body.dimension());
    for (std::uint64_t i = 0; i < budget && static_cast<int>(found.size()) < want; ++i) {
        sampler.next(x);
        if (body.contains(x, 0.0)) found.push_back(x);
    }
    return found;
}

/// Largest shrink ball among a few sampled interior points.
std::optional<Ball> ball_from_samples(const Body& body, const WalkConfig& cfg) {
    const auto points = sample_interior_points(body, cfg.interior_sample_budget, cfg.seed, 16);
    std::optional<Ball> best;
    for (const auto& p : points) {
        try {
            Ball b = shrink_ball_init(body, p, cfg.seed);
            if (!best || b.radius > best->radius) best = std::move(b);
        } catch (const NumericalFailure&) {
        }
    }
    return best;
}

VolumeEstimate empty_estimate(const WalkConfig& cfg, const std::string& method) {
    VolumeEstimate est;
    est.method = method;
    est.empty = true;
    est.epsilon = cfg.epsilon;
    est.seed = cfg.seed;
    return est;
}

}  // namespace

VolumeEstimate volume_hnr(const Body& body, const WalkConfig& cfg) {
    if (!body.is_convex()) throw UsageError("volume_hnr: body is not convex; use the non-convex estimator");
    Ball ball;
    if (body.ellipsoids().size() <= 1) {
        ball = inscribed_ball_for_ellipsoid_body(body, cfg.seed);
    } else {
        auto found = ball_from_samples(body, cfg);
        if (!found) return empty_estimate(cfg, "hnr");
        ball = *found;
    }
    return volume_hnr(body, ball, cfg);
}

namespace {

enum class CoreContact { engulfs, misses, cuts };

/// How the excluded core meets the polytope part of a shell. The core holds
/// the polytope when it holds every simplex vertex; it misses it when a
/// Frank-Wolfe lower bound on the core form over the polytope exceeds the level.
CoreContact core_contact(const Body& body, const Ellipsoid& core) {
    const int d = body.dimension();
    bool engulfs = core.value(Vector::Zero(d)) <= 0.0;
    for (int i = 0; i < d && engulfs; ++i) engulfs = core.value(Vector::Unit(d, i)) <= 0.0;
    if (engulfs) return CoreContact::engulfs;

    const auto hs = body.all_halfspaces();
    Matrix a(static_cast<Eigen::Index>(hs.size()), d);
    Vector b(static_cast<Eigen::Index>(hs.size()));
    for (std::size_t i = 0; i < hs.size(); ++i) {
        a.row(static_cast<Eigen::Index>(i)) = hs[i].normal.transpose();
        b(static_cast<Eigen::Index>(i)) = hs[i].offset;
    }
    const Matrix& q = core.matrix();
    const double level = core.level();
    Vector x;
    try {
        x = maximize_lp(Vector::Zero(d), a, b).x;
    } catch (const Infeasible&) {
        return CoreContact::cuts;  // left to the sampler, which finds nothing
    }
    for (int it = 0; it < 500; ++it) {
        const Vector r = x - core.center();
        const double f = r.dot(q * r);
        if (f <= level) return CoreContact::cuts;
        const Vector g = 2.0 * q * r;
        const Vector s = maximize_lp(-g, a, b).x;
        const Vector step = s - x;
        const double gap = -g.dot(step);
        if (f - gap > level * (1.0 + 1e-9) + 1e-12) return CoreContact::misses;
        const double curv = step.dot(q * step);
        if (!(curv > 0.0) || gap <= 0.0) break;
        x += std::min(1.0, gap / (2.0 * curv)) * step;
    }
    return CoreContact::cuts;
}

}  // namespace

VolumeEstimate volume_nonconvex(const Body& body, const WalkConfig& cfg) {
    const int d = body.dimension();
    if (body.is_convex()) throw UsageError("volume_nonconvex: body is convex; use volume_hnr");
    if (d > cfg.max_dimension_nonconvex && !cfg.allow_nonconvex_high_d) {
        throw UsageError("volume_nonconvex: d = " + std::to_string(d) + " exceeds " +
                         std::to_string(cfg.max_dimension_nonconvex) +
                         "; the shell estimator is unreliable there (override to force)");
    }
    std::vector<EllipsoidConstraint> kept;
    const Ellipsoid* core = nullptr;
    for (const auto& e : body.ellipsoids()) {
        if (e.side == Side::outside) core = &e.ellipsoid;
        else kept.push_back(e);
    }
    switch (core_contact(body, *core)) {
    case CoreContact::engulfs: {
        auto est = empty_estimate(cfg, "hnr-nonconvex");
        est.experimental = true;
        return est;
    }
    case CoreContact::misses: {
        // Nothing is excluded: the shell is the convex body without its core.
        auto est = volume_hnr(Body(d, body.halfspaces(), kept), cfg);
        est.method = "hnr-nonconvex";
        return est;
    }
    case CoreContact::cuts:
        break;
    }
    auto ball = ball_from_samples(body, cfg);
    if (!ball) {
        auto est = empty_estimate(cfg, "hnr-nonconvex");
        est.experimental = true;
        return est;
    }
    auto est = multiphase(body, *ball, cfg);
    est.method = "hnr-nonconvex";
    est.experimental = true;
    return est;
}

}  // namespace sslice
