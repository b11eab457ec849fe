#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "simplex_slice/exact_volume.hpp"
#include "simplex_slice/rng.hpp"
#include "simplex_slice/sampling.hpp"

using namespace sslice;

namespace {

double factorial(int d) {
    double f = 1.0;
    for (int i = 2; i <= d; ++i) f *= i;
    return f;
}

// Fraction of the unit simplex with a.x <= z, by the divided-difference
// formula sum_j (z - u_j)_+^d / prod_{k != j} (u_k - u_j) over the vertex
// values u (origin included). Needs distinct u; fine for small d.
double cut_fraction_oracle(const Vector& a, double z) {
    const int d = static_cast<int>(a.size());
    std::vector<double> u{0.0};
    for (int i = 0; i < d; ++i) u.push_back(a(i));
    long double sum = 0.0L;
    for (int j = 0; j <= d; ++j) {
        if (z <= u[j]) continue;
        long double term = std::pow(static_cast<long double>(z - u[j]), d);
        for (int k = 0; k <= d; ++k)
            if (k != j) term /= static_cast<long double>(u[k] - u[j]);
        sum += term;
    }
    return static_cast<double>(sum);
}

using Polygon = std::vector<std::array<double, 2>>;

// Sutherland-Hodgman clip against n.x <= z.
Polygon clip(const Polygon& poly, double nx, double ny, double z) {
    Polygon out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        const double fp = nx * p[0] + ny * p[1] - z;
        const double fq = nx * q[0] + ny * q[1] - z;
        if (fp <= 0) out.push_back(p);
        if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
            const double t = fp / (fp - fq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

double area(const Polygon& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return std::abs(s) / 2.0;
}

double polygon_oracle(const BandPolytope& bp) {
    Polygon poly{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    for (const auto& f : bp.families) {
        if (f.upper) poly = clip(poly, f.normal[0], f.normal[1], *f.upper);
        if (f.lower) poly = clip(poly, -f.normal[0], -f.normal[1], -*f.lower);
    }
    return poly.size() < 3 ? 0.0 : area(poly);
}

BandFamily band(const Vector& a, std::optional<double> lo, std::optional<double> hi) {
    return BandFamily{std::vector<double>(a.data(), a.data() + a.size()), lo, hi};
}

Vector random_normal(int d, RandomStream& rng) {
    Vector a(d);
    for (int i = 0; i < d; ++i) a(i) = 20.0 * rng.uniform() - 10.0;
    return a;
}

bool inside(const BandPolytope& bp, const Vector& x, double tol) {
    if (x.minCoeff() < -tol || x.sum() > 1.0 + tol) return false;
    for (const auto& f : bp.families) {
        double v = 0.0;
        for (int i = 0; i < bp.dimension; ++i) v += f.normal[i] * x(i);
        if (f.lower && v < *f.lower - tol) return false;
        if (f.upper && v > *f.upper + tol) return false;
    }
    return true;
}

// Every d-subset of the constraint planes, solved and kept when feasible.
std::vector<Vector> brute_force_vertices(const BandPolytope& bp) {
    const int d = bp.dimension;
    std::vector<std::pair<Vector, double>> planes;
    for (int i = 0; i < d; ++i) planes.emplace_back(Vector::Unit(d, i), 0.0);
    planes.emplace_back(Vector::Ones(d), 1.0);
    for (const auto& f : bp.families) {
        const Vector n = Eigen::Map<const Vector>(f.normal.data(), d);
        if (f.lower) planes.emplace_back(n, *f.lower);
        if (f.upper) planes.emplace_back(n, *f.upper);
    }
    const int t = static_cast<int>(planes.size());
    std::vector<Vector> found;
    std::vector<int> pick(d);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == d) {
            Matrix a(d, d);
            Vector b(d);
            for (int r = 0; r < d; ++r) {
                a.row(r) = planes[pick[r]].first.transpose();
                b(r) = planes[pick[r]].second;
            }
            Eigen::FullPivLU<Matrix> lu(a);
            if (lu.rank() < d) return;
            const Vector x = lu.solve(b);
            if (!inside(bp, x, 1e-9)) return;
            for (const auto& y : found)
                if ((y - x).cwiseAbs().maxCoeff() < 1e-9) return;
            found.push_back(x);
            return;
        }
        for (int i = start; i < t; ++i) {
            pick[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return found;
}

}  // namespace

TEST_CASE("Varsi fraction basics") {
    CHECK(varsi_fraction(Halfspace(Vector::Ones(2), 0.5), 2).value == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(varsi_fraction(Halfspace(Vector::Ones(2), 1.5), 2).value == 1.0);
    CHECK(varsi_fraction(Halfspace(Vector::Ones(2), -0.5), 2).value == 0.0);
    Vector a(2);
    a << 1.0, -1.0;
    CHECK(varsi_fraction(Halfspace(a, 0.0), 2).value == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(varsi_fraction(Halfspace(Vector::Unit(2, 0), 0.5), 2).value == doctest::Approx(0.75).epsilon(1e-14));
    for (int d : {3, 7, 20}) {
        CHECK(varsi_fraction(Halfspace(Vector::Ones(d), 0.5), d).value == doctest::Approx(std::pow(0.5, d)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(varsi_fraction(Halfspace(Vector::Ones(3), 0.5), 2), DimensionMismatch);
}

TEST_CASE("Varsi agrees with the divided-difference formula") {
    RandomStream rng(101);
    for (int d : {2, 3, 4, 6}) {
        for (int k = 0; k < 40; ++k) {
            const Vector a = random_normal(d, rng);
            const double lo = std::min(0.0, a.minCoeff());
            const double hi = std::max(0.0, a.maxCoeff());
            const double z = lo + (hi - lo) * rng.uniform();
            const double v = varsi_fraction(Halfspace(a, z), d).value;
            CHECK(v == doctest::Approx(cut_fraction_oracle(a, z)).epsilon(1e-8));
        }
    }
}

TEST_CASE("Varsi agrees with polygon clipping in the plane") {
    RandomStream rng(5);
    for (int k = 0; k < 100; ++k) {
        const Vector a = random_normal(2, rng);
        const double z = 10.0 * rng.normal();
        BandPolytope bp{2, {band(a, std::nullopt, z)}};
        CHECK(varsi_fraction(Halfspace(a, z), 2).value == doctest::Approx(2.0 * polygon_oracle(bp)).epsilon(1e-10));
    }
}

TEST_CASE("Varsi is monotone and handles repeated vertex values") {
    Vector a(4);
    a << 1.0, 1.0, -2.0, 1.0;
    double prev = 0.0;
    for (double z = -2.5; z <= 1.5; z += 0.01) {
        const double v = varsi_fraction(Halfspace(a, z), 4).value;
        CHECK(v >= prev - 1e-14);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK(prev == 1.0);
}

TEST_CASE("level bisection hits the target fraction") {
    RandomStream rng(2);
    for (int d : {2, 10, 50}) {
        const Vector a = random_normal(d, rng);
        for (double target : {0.001, 0.01, 0.5, 0.99}) {
            const LevelSearch s = bisect_level_for_fraction(a, target, 1e-12);
            CHECK(std::abs(s.achieved - target) <= 1e-12);
            CHECK(std::abs(varsi_fraction(Halfspace(a, s.level), d).value - target) <= 1e-12);
        }
    }
    const double lo = bisect_level_for_fraction(Vector::Ones(5), 0.2).level;
    const double hi = bisect_level_for_fraction(Vector::Ones(5), 0.7).level;
    CHECK(band_fraction(Vector::Ones(5), lo, hi) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("families are grouped by direction") {
    Vector a(3);
    a << 1.0, 2.0, 3.0;
    const std::vector<Halfspace> hs{Halfspace(a, 2.0), Halfspace(2.0 * a, 3.0), Halfspace(-a, -0.5)};
    const BandPolytope bp = group_into_families(3, hs);
    REQUIRE(bp.families.size() == 1);
    const auto& f = bp.families[0];
    // Bounds are expressed along the first normal seen; the tighter upper bound wins.
    const double scale = f.normal[0];
    CHECK(*f.upper / scale == doctest::Approx(1.5));
    CHECK(*f.lower / scale == doctest::Approx(0.5));

    const std::vector<Halfspace> three{Halfspace(Vector::Unit(3, 0), 0.5), Halfspace(Vector::Unit(3, 1), 0.5),
                                       Halfspace(Vector::Unit(3, 2), 0.5)};
    CHECK_THROWS_AS(group_into_families(3, three), UsageError);
}

TEST_CASE("Lawrence on the bare simplex and empty bands") {
    for (int d : {1, 2, 5, 12}) {
        BandPolytope bp{d, {}};
        CHECK(lawrence_volume(bp).value == doctest::Approx(1.0 / factorial(d)).epsilon(1e-12));
        LawrenceOptions exact;
        exact.backend = Backend::rational;
        const auto r = lawrence_volume(to_exact(bp), exact);
        REQUIRE(r.exact.has_value());
        CHECK(*r.exact == Rational(1, static_cast<unsigned long>(factorial(d))));
    }
    BandPolytope empty{3, {band(Vector::Ones(3), 2.0, 3.0)}};
    CHECK(lawrence_volume(empty).value == 0.0);
}

TEST_CASE("Lawrence single band equals a difference of Varsi cuts") {
    RandomStream rng(77);
    for (int d : {2, 3, 5, 8, 12}) {
        for (int k = 0; k < 8; ++k) {
            const Vector a = random_normal(d, rng);
            const double lo = bisect_level_for_fraction(a, 0.1 + 0.3 * rng.uniform()).level;
            const double hi = bisect_level_for_fraction(a, 0.5 + 0.4 * rng.uniform()).level;
            BandPolytope bp{d, {band(a, lo, hi)}};
            LawrenceOptions opts;
            opts.seed = static_cast<std::uint64_t>(k + 1);
            const double expect = band_fraction(a, lo, hi) / factorial(d);
            CHECK(lawrence_volume(bp, opts).value == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("Lawrence two families in the plane match polygon clipping") {
    RandomStream rng(3);
    int nonempty = 0;
    for (int k = 0; k < 60; ++k) {
        const Vector a = random_normal(2, rng);
        const Vector b = random_normal(2, rng);
        const double a_lo = bisect_level_for_fraction(a, 0.5 * rng.uniform()).level;
        const double a_hi = bisect_level_for_fraction(a, 0.5 + 0.5 * rng.uniform()).level;
        const double b_lo = bisect_level_for_fraction(b, 0.5 * rng.uniform()).level;
        const double b_hi = bisect_level_for_fraction(b, 0.5 + 0.5 * rng.uniform()).level;
        BandPolytope bp{2, {band(a, a_lo, a_hi), band(b, b_lo, b_hi)}};
        const double expect = polygon_oracle(bp);
        nonempty += expect > 0.0;
        CHECK(lawrence_volume(bp).value == doctest::Approx(expect).epsilon(1e-9).scale(1e-12));
    }
    CHECK(nonempty > 30);
}

TEST_CASE("Lawrence two families match Monte Carlo") {
    RandomStream rng(8);
    for (int d : {3, 4, 6}) {
        const Vector a = random_normal(d, rng);
        const Vector b = random_normal(d, rng);
        BandPolytope bp{d,
                        {band(a, bisect_level_for_fraction(a, 0.2).level, bisect_level_for_fraction(a, 0.9).level),
                         band(b, std::nullopt, bisect_level_for_fraction(b, 0.6).level)}};
        const double vol = lawrence_volume(bp).value;
        std::vector<Halfspace> hs{Halfspace(a, *bp.families[0].upper), Halfspace(-a, -*bp.families[0].lower),
                                  Halfspace(b, *bp.families[1].upper)};
        SamplerConfig cfg;
        cfg.dimension = d;
        cfg.seed = 99;
        const std::uint64_t n = 1000000;
        const auto est = rejection_volume(Body(d, hs), n, cfg, 1.0 / factorial(d));
        const double p = vol * factorial(d);
        CHECK(std::abs(est.volume_fraction - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("vertex enumeration matches brute force") {
    RandomStream rng(12);
    for (int d : {2, 3, 4, 5, 6}) {
        for (int k = 0; k < 6; ++k) {
            const Vector a = random_normal(d, rng);
            const Vector b = random_normal(d, rng);
            BandPolytope bp{d,
                            {band(a, bisect_level_for_fraction(a, 0.3 * rng.uniform()).level,
                                  bisect_level_for_fraction(a, 0.6 + 0.3 * rng.uniform()).level)}};
            if (k % 2) bp.families.push_back(band(b, std::nullopt, bisect_level_for_fraction(b, 0.7).level));
            const auto fast = enumerate_vertices(bp);
            const auto slow = brute_force_vertices(bp);
            CHECK(fast.size() == slow.size());
            for (const auto& v : fast) {
                CHECK(static_cast<int>(v.active.size()) == d);
                const bool matched = std::any_of(slow.begin(), slow.end(), [&](const Vector& y) {
                    return (y - v.coords).cwiseAbs().maxCoeff() < 1e-8;
                });
                CHECK(matched);
            }
        }
    }
}

TEST_CASE("rational and float backends agree") {
    RandomStream rng(21);
    for (int d : {5, 10, 20}) {
        const Vector a = random_normal(d, rng);
        const Vector b = random_normal(d, rng);
        BandPolytope bp{d,
                        {band(a, bisect_level_for_fraction(a, 0.3).level, bisect_level_for_fraction(a, 0.8).level),
                         band(b, bisect_level_for_fraction(b, 0.1).level, std::nullopt)}};
        LawrenceOptions f;
        LawrenceOptions r;
        r.backend = Backend::rational;
        const auto fv = lawrence_volume(bp, f);
        const auto rv = lawrence_volume(to_exact(bp), r);
        REQUIRE(rv.exact.has_value());
        CHECK(std::abs(fv.value / to_double(*rv.exact) - 1.0) < 1e-10);
        CHECK(fv.vertex_count == rv.vertex_count);
    }
}

TEST_CASE("the volume does not depend on the objective direction") {
    Vector a(4);
    a << 1.0, -3.0, 2.5, 0.5;
    BandPolytope bp{4, {band(a, bisect_level_for_fraction(a, 0.25).level, bisect_level_for_fraction(a, 0.75).level)}};
    LawrenceOptions r;
    r.backend = Backend::rational;
    std::optional<Rational> first;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        r.seed = seed;
        const auto v = lawrence_volume(to_exact(bp), r);
        if (!first) first = *v.exact;
        CHECK(*v.exact == *first);
    }
    r.c = std::vector<long>{3, -7, 11, 2};
    CHECK(*lawrence_volume(to_exact(bp), r).exact == *first);
}

TEST_CASE("degenerate arrangements are reported") {
    // x_1 + x_2 <= 1 in d = 3 contains the simplex vertices e_1 and e_2.
    Vector a(3);
    a << 1.0, 1.0, 0.0;
    BandPolytope bp{3, {band(a, std::nullopt, 1.0)}};
    CHECK_THROWS_AS(lawrence_volume(bp), DegenerateInput);
    try {
        lawrence_volume(bp);
    } catch (const DegenerateInput& e) {
        CHECK_FALSE(e.constraint.empty());
    }
}

TEST_CASE("float backend refuses high dimension") {
    BandPolytope bp{41, {}};
    CHECK_THROWS_AS(lawrence_volume(bp), UsageError);
}
