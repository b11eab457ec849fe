#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "simplex_slice/geometry.hpp"
#include "simplex_slice/rng.hpp"

namespace sslice {

enum class SamplerMethod {
    /// d+1 unit exponentials normalised by their sum.
    exponential,
    /// Spacings of d sorted distinct integers in {1, ..., K-1}, K = 2^63 - 1.
    sorted_integers,
};

struct SamplerConfig {
    SamplerMethod method = SamplerMethod::exponential;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    int dimension = 1;
};

/// Streaming uniform sampler for the full-dimensional unit simplex
/// { x >= 0, sum x <= 1 } in R^d. Deterministic given (seed, stream).
class UnitSimplexSampler {
public:
    explicit UnitSimplexSampler(const SamplerConfig& cfg);

    int dimension() const { return dim_; }

    /// Writes one point into `out` (size d).
    void next(Eigen::Ref<Vector> out);
    /// Writes the point's barycentric weights (1 - sum x, x) into `out` (size d+1).
    void next_barycentric(Eigen::Ref<Vector> out);

private:
    void draw_weights();

    int dim_;
    SamplerMethod method_;
    RandomStream rng_;
    std::vector<double> weights_;
    std::vector<std::uint64_t> cuts_;
};

/// n points as the columns of a d x n matrix.
Matrix sample_unit_simplex(std::size_t n, const SamplerConfig& cfg);

/// n uniform points of an arbitrary simplex (unit points mapped through its frame).
Matrix sample_simplex(std::size_t n, const Simplex& simplex, const SamplerConfig& cfg);

struct SampleRequirement {
    std::uint64_t samples;
    double confidence;
};

/// Samples needed for relative error `target_error` with the tabulated
/// confidence, when the volume fraction p has order ceil(-log10 p) = p_order.
/// Errors between table rows use the next tighter row.
SampleRequirement required_samples(double target_error, int p_order);

struct RejectionEstimate {
    double volume_fraction = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
    double abs_volume = 0.0;
    double std_error = 0.0;
    /// No sample landed in the body.
    bool below_resolution = false;
};

/// Fraction of `n` uniform unit-simplex points inside `body`; the absolute
/// volume is the fraction times `reference_volume`.
RejectionEstimate rejection_volume(const Body& body, std::uint64_t n, const SamplerConfig& cfg,
                                   double reference_volume);

/// ceil(-log10 max(p, 1e-5)) from a pilot of `pilot` samples.
int estimate_p_order(const Body& body, const SamplerConfig& cfg, std::uint64_t pilot = 100000);

/// Band index of `value` among strictly increasing `levels`: the number of
/// levels strictly below it. A value equal to a level falls in the band below.
std::size_t band_index(std::span<const double> levels, double value);

/// Histogram with levels.size() + 1 bands; band 0 and band l are the sentinels
/// below the first and above the last level.
std::vector<std::uint64_t> assign_to_bands(std::span<const double> values, std::span<const double> levels);

/// Bands of the linear forms family.normal . x over the columns of `points`.
std::vector<std::uint64_t> assign_to_bands(const Matrix& points, const HyperplaneFamily& family);

/// Bands of the quadratic form lambda^T C lambda over the barycentric weights
/// of the columns of `points` (unit-frame points, C of size d+1).
std::vector<std::uint64_t> assign_to_bands(const Matrix& points, const Matrix& quadratic_form,
                                           std::span<const double> levels);

}  // namespace sslice
