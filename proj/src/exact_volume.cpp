#include "simplex_slice/exact_volume.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "simplex_slice/rng.hpp"

namespace sslice {

double varsi_fraction_from_vertex_values(std::span<const double> vertex_values, double z) {
    std::vector<double> ys;
    std::vector<double> xs;
    ys.reserve(vertex_values.size());
    xs.reserve(vertex_values.size());
    for (double v : vertex_values) {
        const double u = v - z;
        (u >= 0.0 ? ys : xs).push_back(u);
    }
    if (xs.empty()) return 0.0;
    if (ys.empty()) return 1.0;
    std::vector<double> a(ys.size() + 1, 0.0);
    a[0] = 1.0;
    for (double x : xs) {
        for (std::size_t k = 1; k < a.size(); ++k) {
            const double y = ys[k - 1];
            a[k] = (y * a[k] - x * a[k - 1]) / (y - x);
        }
    }
    return std::clamp(a.back(), 0.0, 1.0);
}

namespace {

std::vector<double> unit_vertex_values(const Vector& normal) {
    std::vector<double> values(normal.size() + 1);
    values[0] = 0.0;
    for (Eigen::Index i = 0; i < normal.size(); ++i) values[i + 1] = normal(i);
    return values;
}

}  // namespace

CutFraction varsi_fraction(const Halfspace& halfspace, int d) {
    if (halfspace.dimension() != d) throw DimensionMismatch("varsi_fraction: halfspace dimension differs");
    const auto values = unit_vertex_values(halfspace.normal);
    return CutFraction{varsi_fraction_from_vertex_values(values, halfspace.offset)};
}

double band_fraction(const Vector& normal, double z_lo, double z_hi) {
    if (!(z_lo < z_hi)) return 0.0;
    const auto values = unit_vertex_values(normal);
    const double hi = varsi_fraction_from_vertex_values(values, z_hi);
    const double lo = varsi_fraction_from_vertex_values(values, z_lo);
    return std::max(0.0, hi - lo);
}

LevelSearch bisect_level_for_fraction(std::span<const double> vertex_values, double target, double tol) {
    if (!(target > 0.0 && target < 1.0)) throw UsageError("bisect_level_for_fraction: target must lie in (0, 1)");
    if (!(tol > 0.0)) throw UsageError("bisect_level_for_fraction: tolerance must be positive");
    const auto [mn, mx] = std::minmax_element(vertex_values.begin(), vertex_values.end());
    double lo = *mn;
    double hi = *mx;
    if (!(lo < hi)) throw UsageError("bisect_level_for_fraction: linear form is constant on the simplex");

    LevelSearch best;
    best.level = lo;
    best.achieved = 0.0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= 2000; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            best.plateau = true;
            break;
        }
        const double f = varsi_fraction_from_vertex_values(vertex_values, mid);
        const double gap = std::abs(f - target);
        best.iterations = it;
        if (gap < best_gap) {
            best_gap = gap;
            best.level = mid;
            best.achieved = f;
        }
        if (gap <= tol) return best;
        (f < target ? lo : hi) = mid;
    }
    best.plateau = best_gap > tol;
    return best;
}

LevelSearch bisect_level_for_fraction(const Vector& normal, double target, double tol) {
    const auto values = unit_vertex_values(normal);
    return bisect_level_for_fraction(values, target, tol);
}

double unit_simplex_volume(int d) {
    double v = 1.0;
    for (int i = 2; i <= d; ++i) v /= i;
    return v;
}

std::string describe(const ConstraintId& id) {
    switch (id.kind) {
        case ConstraintKind::coordinate:
            return "x_" + std::to_string(id.index) + " >= 0";
        case ConstraintKind::supporting:
            return "sum x <= 1";
        case ConstraintKind::family_lower:
            return "lower hyperplane of family " + std::to_string(id.index);
        case ConstraintKind::family_upper:
            return "upper hyperplane of family " + std::to_string(id.index);
    }
    return "?";
}

ExactBandPolytope to_exact(const BandPolytope& polytope) {
    ExactBandPolytope out;
    out.dimension = polytope.dimension;
    for (const auto& f : polytope.families) {
        ExactBandFamily g;
        for (double a : f.normal) g.normal.push_back(rational_from_double(a));
        if (f.lower) g.lower = rational_from_double(*f.lower);
        if (f.upper) g.upper = rational_from_double(*f.upper);
        out.families.push_back(std::move(g));
    }
    return out;
}

BandPolytope to_float(const ExactBandPolytope& polytope) {
    BandPolytope out;
    out.dimension = polytope.dimension;
    for (const auto& f : polytope.families) {
        BandFamily g;
        for (const auto& a : f.normal) g.normal.push_back(to_double(a));
        if (f.lower) g.lower = to_double(*f.lower);
        if (f.upper) g.upper = to_double(*f.upper);
        out.families.push_back(std::move(g));
    }
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Scalar policies: float arithmetic uses relative thresholds, rationals are exact.

template <class T>
struct Arith {
    static bool is_exact() { return false; }
    static T abs(const T& x) { return x < 0 ? -x : x; }
    static bool near_zero(const T& x, const T& scale, double rel) { return abs(x) <= T(rel) * scale; }
    static T from_long(long v) { return T(v); }
    static T from_double(double v) { return T(v); }
    static double to_dbl(const T& x) { return static_cast<double>(x); }
};

template <>
struct Arith<Rational> {
    static bool is_exact() { return true; }
    static Rational abs(const Rational& x) { return ::abs(x); }
    static bool near_zero(const Rational& x, const Rational&, double) { return sgn(x) == 0; }
    static Rational from_long(long v) { return Rational(v); }
    static Rational from_double(double v) { return rational_from_double(v); }
    static double to_dbl(const Rational& x) { return to_double(x); }
};

template <class T>
bool proportional(const std::vector<T>& n, const std::vector<T>& a, T& factor) {
    std::size_t j = 0;
    while (j < a.size() && a[j] == 0) ++j;
    if (j == a.size()) return false;
    factor = n[j] / a[j];
    if (factor == 0) return false;
    T scale = 0;
    for (const auto& v : n) scale = std::max(scale, Arith<T>::abs(v));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!Arith<T>::near_zero(n[i] - factor * a[i], scale, 1e-12)) return false;
    }
    return true;
}

template <class T>
BandPolytopeT<T> group_families(int d, const std::vector<std::pair<std::vector<T>, T>>& halfspaces) {
    BandPolytopeT<T> out;
    out.dimension = d;
    for (const auto& [normal, offset] : halfspaces) {
        if (static_cast<int>(normal.size()) != d) throw DimensionMismatch("group_into_families: dimension differs");
        bool placed = false;
        for (auto& fam : out.families) {
            T s;
            if (!proportional(normal, fam.normal, s)) continue;
            const T level = offset / s;
            if (s > 0) {
                if (!fam.upper || level < *fam.upper) fam.upper = level;
            } else {
                if (!fam.lower || level > *fam.lower) fam.lower = level;
            }
            placed = true;
            break;
        }
        if (!placed) {
            BandFamilyT<T> fam;
            fam.normal = normal;
            fam.upper = offset;
            out.families.push_back(std::move(fam));
        }
    }
    if (out.families.size() > 2) {
        throw UsageError("lawrence: supports at most two parallel families, got " + std::to_string(out.families.size()));
    }
    return out;
}

}  // namespace

BandPolytope group_into_families(int d, const std::vector<Halfspace>& halfspaces) {
    std::vector<std::pair<std::vector<double>, double>> raw;
    for (const auto& h : halfspaces) raw.emplace_back(std::vector<double>(h.normal.begin(), h.normal.end()), h.offset);
    return group_families<double>(d, raw);
}

ExactBandPolytope group_into_families(int d, const std::vector<ExactHalfspace>& halfspaces) {
    std::vector<std::pair<std::vector<Rational>, Rational>> raw;
    for (const auto& h : halfspaces) raw.emplace_back(h.normal, h.offset);
    return group_families<Rational>(d, raw);
}

namespace {

constexpr double kDegenerateTol = 1e-10;
constexpr double kGammaTol = 1e-8;

template <class T>
struct Plane {
    int family;
    bool upper;
    T level;
};

/// A vertex as a point in the relative interior of a simplex face:
/// x = sum mu_j v_{support_j}, where support index 0 is the origin and
/// index i >= 1 is e_i, lying on `planes` (one per family at most).
template <class T>
struct FaceVertex {
    std::array<int, 3> support{};
    std::array<T, 3> mu{};
    int size = 0;
    std::array<int, 2> planes{};
    int plane_count = 0;
};

template <class T>
class Arrangement {
public:
    explicit Arrangement(const BandPolytopeT<T>& p) : poly_(p), d_(p.dimension) {
        if (d_ < 1) throw UsageError("lawrence: dimension must be >= 1");
        if (poly_.families.size() > 2) throw UsageError("lawrence: at most two parallel families are supported");
        for (std::size_t f = 0; f < poly_.families.size(); ++f) {
            const auto& fam = poly_.families[f];
            if (static_cast<int>(fam.normal.size()) != d_) throw DimensionMismatch("lawrence: family normal dimension");
            if (fam.lower) planes_.push_back({static_cast<int>(f), false, *fam.lower});
            if (fam.upper) planes_.push_back({static_cast<int>(f), true, *fam.upper});
            T s = 1;
            for (const auto& a : fam.normal) s = std::max(s, Arith<T>::abs(a));
            if (fam.lower) s = std::max(s, Arith<T>::abs(*fam.lower));
            if (fam.upper) s = std::max(s, Arith<T>::abs(*fam.upper));
            scale_.push_back(s);
        }
    }

    bool empty_band() const {
        for (const auto& fam : poly_.families) {
            if (fam.lower && fam.upper && !(*fam.lower < *fam.upper)) return true;
        }
        return false;
    }

    const T& value(int family, int s) const {
        static const T zero = 0;
        return s == 0 ? zero : poly_.families[family].normal[s - 1];
    }

    std::vector<FaceVertex<T>> enumerate() const {
        std::vector<FaceVertex<T>> out;
        const int np = static_cast<int>(planes_.size());
        // Signed distances of every simplex vertex to every plane; also the
        // degeneracy test of simplex vertices on hyperplanes.
        std::vector<std::vector<int>> sign(np, std::vector<int>(d_ + 1));
        std::vector<std::vector<T>> dist(np, std::vector<T>(d_ + 1));
        for (int p = 0; p < np; ++p) {
            for (int s = 0; s <= d_; ++s) {
                dist[p][s] = value(planes_[p].family, s) - planes_[p].level;
                if (Arith<T>::near_zero(dist[p][s], scale_[planes_[p].family], kDegenerateTol)) {
                    throw DegenerateInput("simplex vertex " + std::to_string(s) + " lies on " + plane_name(p),
                                          plane_name(p));
                }
                dist[p][s] < 0 ? sign[p][s] = -1 : sign[p][s] = 1;
            }
        }

        // (i) simplex vertices strictly inside every band.
        for (int s = 0; s <= d_; ++s) {
            bool inside = true;
            for (int p = 0; p < np && inside; ++p) inside = planes_[p].upper ? sign[p][s] < 0 : sign[p][s] > 0;
            if (inside) {
                FaceVertex<T> v;
                v.support[0] = s;
                v.mu[0] = 1;
                v.size = 1;
                out.push_back(v);
            }
        }

        // (ii) simplex edges crossing exactly one plane.
        for (int p = 0; p < np; ++p) {
            for (int s = 0; s <= d_; ++s) {
                for (int t = s + 1; t <= d_; ++t) {
                    if (sign[p][s] == sign[p][t]) continue;
                    const T& ds = dist[p][s];
                    const T& dt = dist[p][t];
                    FaceVertex<T> v;
                    v.support = {s, t, 0};
                    v.mu[0] = dt / (dt - ds);
                    v.mu[1] = -ds / (dt - ds);
                    v.size = 2;
                    v.planes[0] = p;
                    v.plane_count = 1;
                    if (inside_other_families(v, planes_[p].family)) out.push_back(v);
                }
            }
        }

        // (iii) 2-faces meeting one plane of each family.
        if (poly_.families.size() == 2) {
            for (int p = 0; p < np; ++p) {
                for (int q = p + 1; q < np; ++q) {
                    if (planes_[p].family == planes_[q].family) continue;
                    enumerate_triangles(p, q, sign, dist, out);
                }
            }
        }
        return out;
    }

    /// Outward normal coefficient of plane p on axis i (1-based).
    T outward(int p, int axis) const {
        const T& a = poly_.families[planes_[p].family].normal[axis - 1];
        return planes_[p].upper ? a : T(-a);
    }

    const Plane<T>& plane(int p) const { return planes_[p]; }
    int dimension() const { return d_; }

    T family_scale(int family) const { return scale_[family]; }

private:
    std::string plane_name(int p) const {
        return (planes_[p].upper ? "upper" : "lower") + std::string(" hyperplane of family ") +
               std::to_string(planes_[p].family);
    }

    T value_at(int family, const FaceVertex<T>& v) const {
        T out = 0;
        for (int j = 0; j < v.size; ++j) out += v.mu[j] * value(family, v.support[j]);
        return out;
    }

    bool inside_other_families(const FaceVertex<T>& v, int family) const {
        for (int p = 0; p < static_cast<int>(planes_.size()); ++p) {
            const auto& pl = planes_[p];
            if (pl.family == family) continue;
            const T diff = value_at(pl.family, v) - pl.level;
            if (Arith<T>::near_zero(diff, scale_[pl.family], kDegenerateTol)) {
                throw DegenerateInput("two hyperplanes meet a simplex edge at the same point (" + plane_name(p) + ")",
                                      plane_name(p));
            }
            if (pl.upper ? diff > 0 : diff < 0) return false;
        }
        return true;
    }

    void enumerate_triangles(int p, int q, const std::vector<std::vector<int>>& sign,
                             const std::vector<std::vector<T>>& dist, std::vector<FaceVertex<T>>& out) const {
        const auto& sp = sign[p];
        const auto& sq = sign[q];
        for (int s = 0; s <= d_; ++s) {
            for (int t = s + 1; t <= d_; ++t) {
                for (int u = t + 1; u <= d_; ++u) {
                    const bool straddle_p = !(sp[s] == sp[t] && sp[t] == sp[u]);
                    const bool straddle_q = !(sq[s] == sq[t] && sq[t] == sq[u]);
                    if (!straddle_p || !straddle_q) continue;
                    const T& ps = dist[p][s];
                    const T& pt = dist[p][t];
                    const T& pu = dist[p][u];
                    const T& qs = dist[q][s];
                    const T& qt = dist[q][t];
                    const T& qu = dist[q][u];
                    // mu solves [1 1 1; p; q] mu = (1, 0, 0).
                    const T ms = pt * qu - pu * qt;
                    const T mt = pu * qs - ps * qu;
                    const T mu_ = ps * qt - pt * qs;
                    const T det = ms + mt + mu_;
                    if (det == 0) continue;
                    const int want = det > 0 ? 1 : -1;
                    auto sgn_of = [](const T& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); };
                    if (sgn_of(ms) == -want || sgn_of(mt) == -want || sgn_of(mu_) == -want) continue;
                    FaceVertex<T> v;
                    v.support = {s, t, u};
                    v.mu = {ms / det, mt / det, mu_ / det};
                    v.size = 3;
                    v.planes = {p, q};
                    v.plane_count = 2;
                    for (int j = 0; j < 3; ++j) {
                        if (Arith<T>::near_zero(v.mu[j], T(1), kDegenerateTol)) {
                            throw DegenerateInput("two hyperplanes meet a simplex edge at the same point (" +
                                                      plane_name(p) + ", " + plane_name(q) + ")",
                                                  plane_name(q));
                        }
                    }
                    out.push_back(v);
                }
            }
        }
    }

    const BandPolytopeT<T>& poly_;
    int d_;
    std::vector<Plane<T>> planes_;
    std::vector<T> scale_;
};

/// Active constraints and gamma for one vertex.
template <class T>
struct VertexSystem {
    std::vector<ConstraintId> active;
    std::vector<T> gamma;
    /// Column scale of each active constraint (for the relative gamma test).
    std::vector<T> column_scale;
    T det_abs;
    T objective;  // c . v
};

template <class T>
T det3(const std::array<std::array<T, 3>, 3>& m, int r) {
    if (r == 0) return T(1);
    if (r == 1) return m[0][0];
    if (r == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Solves A(v) gamma = c using the block structure: the rows of the axes in
/// the support form an r x r system (r <= 3) in the unknowns of the
/// supporting plane and the family hyperplanes; every coordinate-plane
/// unknown then follows from its own row in O(1).
template <class T>
VertexSystem<T> solve_vertex(const Arrangement<T>& arr, const FaceVertex<T>& v, const std::vector<T>& c) {
    const int d = arr.dimension();
    bool has_origin = false;
    std::array<int, 3> rows{};
    int r = 0;
    for (int j = 0; j < v.size; ++j) {
        if (v.support[j] == 0) {
            has_origin = true;
        } else {
            rows[r++] = v.support[j];
        }
    }

    // Unknown columns of the small block: [supporting] + planes.
    std::array<std::array<T, 3>, 3> m{};
    std::array<T, 3> rhs{};
    for (int i = 0; i < r; ++i) {
        int col = 0;
        if (!has_origin) m[i][col++] = T(1);
        for (int h = 0; h < v.plane_count; ++h) m[i][col++] = arr.outward(v.planes[h], rows[i]);
        rhs[i] = c[rows[i] - 1];
    }
    const T det = det3(m, r);

    VertexSystem<T> out;
    out.det_abs = Arith<T>::abs(det);
    if (det == 0) throw NumericalFailure("lawrence: singular vertex system");

    std::array<T, 3> small{};
    for (int k = 0; k < r; ++k) {
        auto mk = m;
        for (int i = 0; i < r; ++i) mk[i][k] = rhs[i];
        small[k] = det3(mk, r) / det;
    }

    T supporting = 0;
    int col = 0;
    if (!has_origin) {
        supporting = small[col++];
        out.active.push_back({ConstraintKind::supporting, 0});
        out.gamma.push_back(supporting);
        out.column_scale.push_back(T(1));
    }
    std::array<T, 2> plane_gamma{};
    for (int h = 0; h < v.plane_count; ++h) {
        plane_gamma[h] = small[col++];
        const auto& pl = arr.plane(v.planes[h]);
        out.active.push_back({pl.upper ? ConstraintKind::family_upper : ConstraintKind::family_lower, pl.family});
        out.gamma.push_back(plane_gamma[h]);
        out.column_scale.push_back(arr.family_scale(pl.family));
    }

    std::vector<bool> in_support(d + 1, false);
    for (int i = 0; i < r; ++i) in_support[rows[i]] = true;
    for (int axis = 1; axis <= d; ++axis) {
        if (in_support[axis]) continue;
        // Row `axis`: -g_axis + supporting + sum_h n_h[axis] g_h = c_axis.
        T g = supporting - c[axis - 1];
        for (int h = 0; h < v.plane_count; ++h) g += arr.outward(v.planes[h], axis) * plane_gamma[h];
        out.active.push_back({ConstraintKind::coordinate, axis});
        out.gamma.push_back(g);
        out.column_scale.push_back(T(1));
    }

    out.objective = 0;
    for (int j = 0; j < v.size; ++j) {
        if (v.support[j] != 0) out.objective += c[v.support[j] - 1] * v.mu[j];
    }
    return out;
}

template <class T>
Vector coords_of(const FaceVertex<T>& v, int d) {
    Vector x = Vector::Zero(d);
    for (int j = 0; j < v.size; ++j) {
        if (v.support[j] != 0) x(v.support[j] - 1) = Arith<T>::to_dbl(v.mu[j]);
    }
    return x;
}

/// Fixed-order pairwise reduction.
template <class T>
T pairwise_sum(std::vector<T>& terms) {
    if (terms.empty()) return T(0);
    std::size_t n = terms.size();
    while (n > 1) {
        const std::size_t half = n / 2;
        for (std::size_t i = 0; i < half; ++i) terms[i] = terms[2 * i] + terms[2 * i + 1];
        if (n % 2 == 1) terms[half] = terms[n - 1];
        n = half + n % 2;
    }
    return terms[0];
}

template <class T>
T integer_power(const T& base, int e) {
    T result = 1;
    T b = base;
    while (e > 0) {
        if (e & 1) result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}

template <>
Rational integer_power<Rational>(const Rational& base, int e) {
    Rational out;
    mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(e));
    mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(e));
    return out;
}

/// Term (c.v)^d / (|det A| prod gamma). Float: multiply d ratios (c.v)/gamma_i
/// to stay within range. Rational: exact.
template <class T>
T lawrence_term(const VertexSystem<T>& sys, int d) {
    if constexpr (std::is_same_v<T, Rational>) {
        Rational denom = sys.det_abs;
        for (const auto& g : sys.gamma) denom *= g;
        return integer_power(sys.objective, d) / denom;
    } else {
        T prod = T(1) / sys.det_abs;
        for (const auto& g : sys.gamma) prod *= sys.objective / g;
        return prod;
    }
}

std::vector<long> draw_objective(int d, std::uint64_t seed, int attempt) {
    RandomStream rng(seed, static_cast<std::uint64_t>(attempt));
    constexpr long span = 1L << 16;
    std::vector<long> c(d);
    for (auto& ci : c) {
        do {
            ci = static_cast<long>(rng.index(2 * span + 1)) - span;
        } while (ci == 0);
    }
    return c;
}

template <class T>
struct Attempt {
    bool ok = false;
    T sum{};
    std::size_t vertices = 0;
};

template <class T>
Attempt<T> try_objective(const Arrangement<T>& arr, const std::vector<FaceVertex<T>>& vertices,
                         const std::vector<long>& c_int) {
    const int d = arr.dimension();
    std::vector<T> c(d);
    T c_scale = 0;
    for (int i = 0; i < d; ++i) {
        c[i] = Arith<T>::from_long(c_int[i]);
        c_scale = std::max(c_scale, Arith<T>::abs(c[i]));
    }
    std::vector<T> terms;
    terms.reserve(vertices.size());
    for (const auto& v : vertices) {
        const auto sys = solve_vertex(arr, v, c);
        for (std::size_t i = 0; i < sys.gamma.size(); ++i) {
            if (Arith<T>::is_exact()) {
                if (sys.gamma[i] == 0) return {};
            } else if (Arith<T>::abs(sys.gamma[i]) * sys.column_scale[i] <= T(kGammaTol) * c_scale) {
                return {};
            }
        }
        if (sys.objective == 0) continue;
        terms.push_back(lawrence_term(sys, d));
    }
    Attempt<T> out;
    out.ok = true;
    out.sum = pairwise_sum(terms);
    out.vertices = vertices.size();
    return out;
}

template <class T>
ExactVolume run_lawrence(const BandPolytopeT<T>& poly, const LawrenceOptions& options, Backend backend) {
    Arrangement<T> arr(poly);
    const int d = poly.dimension;
    ExactVolume result;
    result.backend = backend;
    if (arr.empty_band()) {
        result.value = 0.0;
        if (backend == Backend::rational) result.exact = Rational(0);
        return result;
    }
    const auto vertices = arr.enumerate();
    result.vertex_count = vertices.size();

    const int tries = options.c ? 1 : std::max(1, options.max_retries);
    for (int attempt = 0; attempt < tries; ++attempt) {
        auto c = options.c ? *options.c : draw_objective(d, options.seed, attempt);
        if (static_cast<int>(c.size()) != d) throw DimensionMismatch("lawrence: objective has wrong dimension");
        const auto res = try_objective(arr, vertices, c);
        if (!res.ok) continue;
        result.attempts = attempt + 1;
        result.c = std::move(c);
        if constexpr (std::is_same_v<T, Rational>) {
            mpz_class fact;
            mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(d));
            Rational vol = res.sum / Rational(fact);
            result.value = to_double(vol);
            result.exact = std::move(vol);
        } else {
            T vol = res.sum;
            for (int i = 2; i <= d; ++i) vol /= T(i);
            result.value = static_cast<double>(vol);
        }
        return result;
    }
    throw NumericalFailure("lawrence: objective is nearly constant along an edge after " + std::to_string(tries) +
                           " draws");
}

constexpr int kMaxFloatDimension = 40;

using FloatScalar = __float128;

template <class T>
std::vector<LawrenceVertex> collect_vertices(const BandPolytopeT<T>& poly, const Vector* c) {
    Arrangement<T> arr(poly);
    std::vector<LawrenceVertex> out;
    if (arr.empty_band()) return out;
    const int d = poly.dimension;
    std::vector<T> cv(d, T(1));
    if (c) {
        if (c->size() != d) throw DimensionMismatch("enumerate_vertices: objective has wrong dimension");
        for (int i = 0; i < d; ++i) cv[i] = Arith<T>::from_double((*c)(i));
    }
    for (const auto& v : arr.enumerate()) {
        const auto sys = solve_vertex(arr, v, cv);
        LawrenceVertex lv;
        lv.coords = coords_of(v, d);
        lv.active = sys.active;
        lv.det_abs = Arith<T>::to_dbl(sys.det_abs);
        if (c) {
            lv.gamma.resize(static_cast<Eigen::Index>(sys.gamma.size()));
            for (std::size_t i = 0; i < sys.gamma.size(); ++i) lv.gamma(i) = Arith<T>::to_dbl(sys.gamma[i]);
        }
        out.push_back(std::move(lv));
    }
    return out;
}

}  // namespace

std::vector<LawrenceVertex> enumerate_vertices(const BandPolytope& polytope) {
    return collect_vertices<double>(polytope, nullptr);
}

std::vector<LawrenceVertex> enumerate_vertices(const BandPolytope& polytope, const Vector& c) {
    return collect_vertices<double>(polytope, &c);
}

ExactVolume lawrence_volume(const BandPolytope& polytope, const LawrenceOptions& options) {
    if (options.backend == Backend::rational) return lawrence_volume(to_exact(polytope), options);
    if (polytope.dimension > kMaxFloatDimension) {
        throw UsageError("lawrence: the float backend is limited to d <= " + std::to_string(kMaxFloatDimension) +
                         "; use the rational backend");
    }
    BandPolytopeT<FloatScalar> wide;
    wide.dimension = polytope.dimension;
    for (const auto& f : polytope.families) {
        BandFamilyT<FloatScalar> g;
        for (double a : f.normal) g.normal.push_back(a);
        if (f.lower) g.lower = *f.lower;
        if (f.upper) g.upper = *f.upper;
        wide.families.push_back(std::move(g));
    }
    return run_lawrence(wide, options, Backend::floating);
}

ExactVolume lawrence_volume(const ExactBandPolytope& polytope, const LawrenceOptions& options) {
    if (options.backend == Backend::floating) return lawrence_volume(to_float(polytope), options);
    return run_lawrence(polytope, options, Backend::rational);
}

}  // namespace sslice
