#include <doctest.h>

#include <cmath>
#include <cstring>

#include "simplex_slice/sampling.hpp"
#include "stats.hpp"

using namespace sslice;
using sslice::testing::ks_pvalue;
using sslice::testing::ks_statistic;

namespace {

SamplerConfig config(int d, SamplerMethod m, std::uint64_t seed = 1, std::uint64_t stream = 0) {
    SamplerConfig cfg;
    cfg.dimension = d;
    cfg.method = m;
    cfg.seed = seed;
    cfg.stream = stream;
    return cfg;
}

const SamplerMethod kMethods[] = {SamplerMethod::exponential, SamplerMethod::sorted_integers};

}  // namespace

TEST_CASE("points lie in the unit simplex") {
    for (auto m : kMethods) {
        const Matrix pts = sample_unit_simplex(20000, config(7, m));
        CHECK(pts.minCoeff() >= 0.0);
        CHECK(pts.colwise().sum().maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("d = 1 samples are uniform on [0, 1]") {
    for (auto m : kMethods) {
        const Matrix pts = sample_unit_simplex(100000, config(1, m, 3));
        std::vector<double> v(pts.data(), pts.data() + pts.size());
        const double d = ks_statistic(v, [](double x) { return std::clamp(x, 0.0, 1.0); });
        CHECK(ks_pvalue(d, v.size()) > 0.01);
    }
}

TEST_CASE("first marginal is Beta(1, d) and coordinate means are 1/(d+1)") {
    const int d = 10;
    const std::size_t n = 100000;
    for (auto m : kMethods) {
        const Matrix pts = sample_unit_simplex(n, config(d, m, 5));
        std::vector<double> first(n);
        for (std::size_t j = 0; j < n; ++j) first[j] = pts(0, static_cast<Eigen::Index>(j));
        const double ks = ks_statistic(first, [&](double x) { return 1.0 - std::pow(1.0 - std::clamp(x, 0.0, 1.0), d); });
        CHECK(ks_pvalue(ks, n) > 0.01);

        const double mean = 1.0 / (d + 1);
        const double sd = std::sqrt(mean * (1.0 - mean) / (d + 2));
        const Vector means = pts.rowwise().mean();
        for (int i = 0; i < d; ++i) CHECK(std::abs(means(i) - mean) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("both samplers give indistinguishable coordinate means at d = 20") {
    const int d = 20;
    const std::size_t n = 100000;
    const Matrix a = sample_unit_simplex(n, config(d, SamplerMethod::exponential, 9));
    const Matrix b = sample_unit_simplex(n, config(d, SamplerMethod::sorted_integers, 9));
    const double mean = 1.0 / (d + 1);
    const double sd = std::sqrt(mean * (1.0 - mean) / (d + 2));
    const Vector diff = a.rowwise().mean() - b.rowwise().mean();
    CHECK(diff.cwiseAbs().maxCoeff() <= 4.0 * sd * std::sqrt(2.0 / n));
}

TEST_CASE("same seed and stream give bit-identical streams") {
    for (auto m : kMethods) {
        const Matrix a = sample_unit_simplex(1000, config(6, m, 42, 3));
        const Matrix b = sample_unit_simplex(1000, config(6, m, 42, 3));
        CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
        const Matrix c = sample_unit_simplex(1000, config(6, m, 42, 4));
        CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("similar sub-simplex is hit with its volume fraction") {
    const int d = 6;
    const std::size_t n = 200000;
    for (auto m : kMethods) {
        const Matrix pts = sample_unit_simplex(n, config(d, m, 13));
        for (double s : {0.5, 0.8}) {
            const double q = std::pow(s, d);
            std::size_t hits = 0;
            for (Eigen::Index j = 0; j < pts.cols(); ++j) hits += pts.col(j).sum() <= s;
            CHECK(std::abs(static_cast<double>(hits) / n - q) <= 4.0 * std::sqrt(q / n));
        }
    }
}

TEST_CASE("arbitrary simplex sampling") {
    const std::size_t n = 100000;
    SUBCASE("scaling by 2 doubles the coordinate means") {
        const Simplex doubled(2.0 * Simplex::unit(4).vertices());
        const Matrix a = sample_simplex(n, doubled, config(4, SamplerMethod::exponential, 21));
        const Matrix u = sample_unit_simplex(n, config(4, SamplerMethod::exponential, 21));
        CHECK((a.rowwise().mean() - 2.0 * u.rowwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("empirical centroid of a random 3-simplex") {
        Matrix v(3, 4);
        v << 0.3, 2.0, -1.0, 0.5, 1.0, 0.2, 0.4, 3.0, -0.5, 1.5, 2.5, 0.1;
        const Simplex s(v);
        const Matrix pts = sample_simplex(n, s, config(3, SamplerMethod::sorted_integers, 22));
        const Vector centroid = v.rowwise().mean();
        const Vector mean = pts.rowwise().mean();
        for (int i = 0; i < 3; ++i) {
            const double sd = std::sqrt((pts.row(i).array() - mean(i)).square().mean());
            CHECK(std::abs(mean(i) - centroid(i)) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
        }
        for (Eigen::Index j = 0; j < 1000; ++j) CHECK(cartesian_to_barycentric(pts.col(j), s).is_valid(1e-9));
    }
}

TEST_CASE("required samples follow the error table") {
    auto r = required_samples(0.01, 2);
    CHECK(r.samples == 4000000);
    CHECK(r.confidence == doctest::Approx(0.955));
    r = required_samples(0.10, 2);
    CHECK(r.samples == 40000);
    CHECK(r.confidence == doctest::Approx(0.955));
    r = required_samples(0.05, 3);
    CHECK(r.samples == 2000000);
    CHECK(r.confidence == doctest::Approx(0.975));
    // Between rows the tighter row applies.
    CHECK(required_samples(0.045, 2).samples >= required_samples(0.05, 2).samples);
    CHECK_THROWS_AS(required_samples(0.2, 2), UsageError);
    CHECK_THROWS_AS(required_samples(0.001, 2), UsageError);
}

TEST_CASE("rejection estimates") {
    SUBCASE("full simplex is hit every time") {
        const auto est = rejection_volume(Body::unit_simplex(5), 10000, config(5, SamplerMethod::exponential), 1.0 / 120);
        CHECK(est.volume_fraction == 1.0);
        CHECK(est.hits == 10000);
        CHECK(est.abs_volume == doctest::Approx(1.0 / 120));
    }
    SUBCASE("corner triangle has fraction 1/4") {
        const Body body(2, {Halfspace(Vector::Ones(2), 0.5)});
        const std::uint64_t n = 200000;
        const auto est = rejection_volume(body, n, config(2, SamplerMethod::exponential, 4), 0.5);
        const double sigma = std::sqrt(0.25 * 0.75 / n);
        CHECK(std::abs(est.volume_fraction - 0.25) <= 3.0 * sigma);
        CHECK(est.std_error == doctest::Approx(std::sqrt(est.volume_fraction * (1 - est.volume_fraction) / n)));
        CHECK(est.volume_fraction == static_cast<double>(est.hits) / static_cast<double>(est.trials));
    }
    SUBCASE("no hits is reported, not thrown") {
        const Body body(3, {Halfspace(Vector::Ones(3), 1e-6)});
        const auto est = rejection_volume(body, 1000, config(3, SamplerMethod::exponential), 1.0);
        CHECK(est.hits == 0);
        CHECK(est.below_resolution);
        CHECK(est.volume_fraction == 0.0);
    }
    SUBCASE("standard error matches the spread over seeds") {
        const Body body(5, {Halfspace(Vector::Ones(5), 0.7)});
        std::vector<double> estimates;
        double reported = 0.0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            const auto est = rejection_volume(body, 10000, config(5, SamplerMethod::exponential, seed), 1.0);
            estimates.push_back(est.volume_fraction);
            reported += est.std_error / 100.0;
        }
        double mean = 0.0;
        for (double e : estimates) mean += e / 100.0;
        double var = 0.0;
        for (double e : estimates) var += (e - mean) * (e - mean) / 99.0;
        const double observed = std::sqrt(var);
        CHECK(observed / reported < 1.5);
        CHECK(reported / observed < 1.5);
    }
}

TEST_CASE("p order from a pilot run") {
    const Body body(4, {Halfspace(Vector::Ones(4), std::pow(0.005, 0.25))});  // fraction 0.005
    CHECK(estimate_p_order(body, config(4, SamplerMethod::exponential, 8)) == 3);
    CHECK(estimate_p_order(Body::unit_simplex(4), config(4, SamplerMethod::exponential, 8)) == 0);
}

TEST_CASE("band assignment") {
    const std::vector<double> levels{0.0, 1.0, 2.0};
    CHECK(band_index(levels, -5.0) == 0);
    CHECK(band_index(levels, 0.0) == 0);  // ties go to the band below
    CHECK(band_index(levels, 0.5) == 1);
    CHECK(band_index(levels, 2.0) == 2);
    CHECK(band_index(levels, 2.5) == 3);

    SUBCASE("median splits in two") {
        const std::vector<double> values{1, 2, 3, 4, 5, 6};
        const std::vector<double> median{3.5};
        const auto counts = assign_to_bands(values, median);
        CHECK(counts == std::vector<std::uint64_t>{3, 3});
    }
    SUBCASE("percentile levels give equal bands") {
        const int d = 5;
        const std::size_t n = 1000000;
        const Matrix pts = sample_unit_simplex(n, config(d, SamplerMethod::exponential, 31));
        Vector a(d);
        a << 0.3, -1.0, 2.0, 0.7, 1.1;
        std::vector<double> values(n);
        for (std::size_t j = 0; j < n; ++j) values[j] = a.dot(pts.col(static_cast<Eigen::Index>(j)));
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> levels;
        for (int i = 1; i < 100; ++i) levels.push_back(sorted[static_cast<std::size_t>(i) * n / 100 - 1]);
        const auto counts = assign_to_bands(pts, HyperplaneFamily(a, levels));
        const double sigma = std::sqrt(0.01 * 0.99 * n);
        std::uint64_t total = 0;
        for (auto c : counts) {
            CHECK(std::abs(static_cast<double>(c) - 0.01 * n) <= 3.0 * sigma);
            total += c;
        }
        CHECK(total == n);
    }
    SUBCASE("quadratic form bands") {
        const int d = 3;
        const Matrix pts = sample_unit_simplex(10000, config(d, SamplerMethod::exponential, 2));
        const Matrix c = Matrix::Identity(d + 1, d + 1);
        const std::vector<double> lv{0.3, 0.5};
        const auto counts = assign_to_bands(pts, c, lv);
        std::vector<std::uint64_t> expect(3, 0);
        for (Eigen::Index j = 0; j < pts.cols(); ++j) {
            const Vector w = unit_barycentric(pts.col(j));
            ++expect[band_index(lv, w.squaredNorm())];
        }
        CHECK(counts == expect);
    }
}
