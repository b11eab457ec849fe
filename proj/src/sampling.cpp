#include "simplex_slice/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace sslice {

namespace {

constexpr std::uint64_t kIntegerRange = (std::uint64_t{1} << 63) - 1;  // K

}  // namespace

UnitSimplexSampler::UnitSimplexSampler(const SamplerConfig& cfg)
    : dim_(cfg.dimension), method_(cfg.method), rng_(cfg.seed, cfg.stream) {
    if (dim_ < 1) throw UsageError("sampler: dimension must be >= 1");
    weights_.resize(dim_ + 1);
    cuts_.resize(dim_ + 2);
}

void UnitSimplexSampler::draw_weights() {
    const int d = dim_;
    if (method_ == SamplerMethod::exponential) {
        double sum = 0.0;
        for (int i = 0; i <= d; ++i) {
            // uniform_open never returns 0, so the log is finite.
            weights_[i] = -std::log(rng_.uniform_open());
            sum += weights_[i];
        }
        const double inv = 1.0 / sum;
        for (int i = 0; i <= d; ++i) weights_[i] *= inv;
        return;
    }

    // 0 = x_0 < x_1 < ... < x_d < x_{d+1} = K; redraw on any collision.
    cuts_[0] = 0;
    cuts_[d + 1] = kIntegerRange;
    for (;;) {
        for (int i = 1; i <= d; ++i) cuts_[i] = 1 + rng_.index(kIntegerRange - 1);
        std::sort(cuts_.begin() + 1, cuts_.begin() + d + 1);
        bool distinct = true;
        for (int i = 1; i < d; ++i) distinct = distinct && cuts_[i] != cuts_[i + 1];
        if (distinct) break;
    }
    constexpr double inv_k = 1.0 / static_cast<double>(kIntegerRange);
    // weights_[1..d] are the first d spacings; weights_[0] is the last one.
    for (int i = 1; i <= d; ++i) weights_[i] = static_cast<double>(cuts_[i] - cuts_[i - 1]) * inv_k;
    weights_[0] = static_cast<double>(cuts_[d + 1] - cuts_[d]) * inv_k;
}

void UnitSimplexSampler::next(Eigen::Ref<Vector> out) {
    draw_weights();
    for (int i = 0; i < dim_; ++i) out(i) = weights_[i + 1];
}

void UnitSimplexSampler::next_barycentric(Eigen::Ref<Vector> out) {
    draw_weights();
    for (int i = 0; i <= dim_; ++i) out(i) = weights_[i];
}

Matrix sample_unit_simplex(std::size_t n, const SamplerConfig& cfg) {
    UnitSimplexSampler sampler(cfg);
    Matrix out(cfg.dimension, static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < out.cols(); ++j) sampler.next(out.col(j));
    return out;
}

Matrix sample_simplex(std::size_t n, const Simplex& simplex, const SamplerConfig& cfg) {
    if (cfg.dimension != simplex.dimension()) throw DimensionMismatch("sample_simplex: config dimension differs");
    Matrix unit = sample_unit_simplex(n, cfg);
    const AffineMap& frame = simplex.frame();
    Matrix out = frame.linear() * unit;
    out.colwise() += frame.shift();
    return out;
}

namespace {

struct TableRow {
    double error;
    std::uint64_t m1;
    int m2;
    double confidence;
};

// N = m1 * 10^(m2 + ceil(-log10 p)).
constexpr std::array<TableRow, 10> kRejectionTable{{
    {0.01, 4, 4, 0.955},
    {0.02, 9, 3, 0.942},
    {0.03, 4, 3, 0.942},
    {0.04, 4, 3, 0.972},
    {0.05, 2, 3, 0.975},
    {0.06, 1, 3, 0.942},
    {0.07, 8, 2, 0.952},
    {0.08, 6, 2, 0.951},
    {0.09, 5, 2, 0.956},
    {0.10, 4, 2, 0.955},
}};

}  // namespace

SampleRequirement required_samples(double target_error, int p_order) {
    constexpr double eps = 1e-12;
    if (!(target_error >= 0.01 - eps && target_error <= 0.10 + eps)) {
        throw UsageError("required_samples: error must lie in [0.01, 0.10], got " + std::to_string(target_error));
    }
    if (p_order < 0 || p_order > 12) throw UsageError("required_samples: p order out of range");
    const TableRow* row = &kRejectionTable.front();
    for (const auto& r : kRejectionTable) {
        if (r.error <= target_error + eps) row = &r;
    }
    std::uint64_t n = row->m1;
    for (int i = 0; i < row->m2 + p_order; ++i) n *= 10;
    return {n, row->confidence};
}

RejectionEstimate rejection_volume(const Body& body, std::uint64_t n, const SamplerConfig& cfg,
                                   double reference_volume) {
    if (cfg.dimension != body.dimension()) throw DimensionMismatch("rejection_volume: config dimension differs");
    if (n == 0) throw UsageError("rejection_volume: need at least one sample");
    UnitSimplexSampler sampler(cfg);
    Vector x(body.dimension());
    std::uint64_t hits = 0;
    // Samples are in the simplex by construction; check the extra constraints only.
    for (std::uint64_t i = 0; i < n; ++i) {
        sampler.next(x);
        bool in = true;
        for (const auto& h : body.halfspaces()) {
            if (h.normal.dot(x) > h.offset) {
                in = false;
                break;
            }
        }
        if (in) {
            for (const auto& e : body.ellipsoids()) {
                if (!e.satisfied(x, 0.0)) {
                    in = false;
                    break;
                }
            }
        }
        hits += in ? 1 : 0;
    }
    RejectionEstimate est;
    est.hits = hits;
    est.trials = n;
    est.volume_fraction = static_cast<double>(hits) / static_cast<double>(n);
    est.abs_volume = est.volume_fraction * reference_volume;
    est.std_error = std::sqrt(est.volume_fraction * (1.0 - est.volume_fraction) / static_cast<double>(n));
    est.below_resolution = hits == 0;
    return est;
}

int estimate_p_order(const Body& body, const SamplerConfig& cfg, std::uint64_t pilot) {
    const auto est = rejection_volume(body, pilot, cfg, 1.0);
    const double p = std::max(est.volume_fraction, 1e-5);
    return static_cast<int>(std::ceil(-std::log10(p) - 1e-12));
}

std::size_t band_index(std::span<const double> levels, double value) {
    return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), value) - levels.begin());
}

std::vector<std::uint64_t> assign_to_bands(std::span<const double> values, std::span<const double> levels) {
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i] > levels[i - 1])) throw DataError("assign_to_bands: levels must be strictly increasing");
    }
    std::vector<std::uint64_t> counts(levels.size() + 1, 0);
    for (double v : values) ++counts[band_index(levels, v)];
    return counts;
}

std::vector<std::uint64_t> assign_to_bands(const Matrix& points, const HyperplaneFamily& family) {
    if (points.rows() != family.normal.size()) throw DimensionMismatch("assign_to_bands: dimension differs");
    const Vector values = points.transpose() * family.normal;
    return assign_to_bands(std::span<const double>(values.data(), values.size()), family.offsets);
}

std::vector<std::uint64_t> assign_to_bands(const Matrix& points, const Matrix& quadratic_form,
                                           std::span<const double> levels) {
    const Eigen::Index d = points.rows();
    if (quadratic_form.rows() != d + 1 || quadratic_form.cols() != d + 1) {
        throw DimensionMismatch("assign_to_bands: quadratic form must be (d+1) x (d+1)");
    }
    std::vector<double> values(points.cols());
    Vector lambda(d + 1);
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        lambda = unit_barycentric(points.col(j));
        values[j] = lambda.dot(quadratic_form * lambda);
    }
    return assign_to_bands(values, levels);
}

}  // namespace sslice
