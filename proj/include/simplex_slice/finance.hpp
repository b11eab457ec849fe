#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "simplex_slice/geometry.hpp"
#include "simplex_slice/sampling.hpp"

namespace sslice {

/// Simple returns, one row per date and one column per asset.
struct ReturnsMatrix {
    std::vector<std::string> dates;
    std::vector<std::string> assets;
    Matrix values;  // T x (d+1)

    std::size_t periods() const { return static_cast<std::size_t>(values.rows()); }
    int asset_count() const { return static_cast<int>(values.cols()); }
};

/// CSV with header `date,ASSET1,...`, ISO dates, decimal simple returns.
/// Throws DataError on missing cells, unparsable numbers or returns <= -1.
ReturnsMatrix parse_returns_csv(std::istream& in);
ReturnsMatrix read_returns_csv(const std::string& path);
void write_returns_csv(std::ostream& out, const ReturnsMatrix& returns);

/// (1 + r_i)(1 + r_{i+1}) ... (1 + r_{i+k-1}) - 1 per asset.
Vector compound_returns(const ReturnsMatrix& returns, std::size_t start, std::size_t k);

struct Shrinkage {
    Matrix covariance;
    /// Weight of the scaled-identity target.
    double intensity = 0.0;
};

/// Shrinkage of the (1/n) sample covariance of `window` (rows are
/// observations) towards mu I with mu = trace(S) / p. The intensity is the
/// usual b^2 / d^2 estimate clipped to [1e-4, 1].
Shrinkage shrink_covariance(const Matrix& window);

/// Levels along a linear characteristic, given by its values at the simplex
/// vertices (asset returns). Consecutive levels enclose 1/m of the simplex
/// volume each, up to `tol`.
HyperplaneFamily hyperplane_levels(const Vector& vertex_values, int m, double tol = 1e-6);

/// Empirical i/m quantiles (i = 1..m-1) of lambda^T C lambda over n uniform
/// barycentric points. Requires n >= 100 m.
std::vector<double> ellipsoid_levels(const Matrix& c, int m, std::uint64_t n, const SamplerConfig& cfg);

/// A characteristic of portfolios lambda: linear R.lambda or quadratic
/// lambda^T C lambda, with its band levels.
struct CopulaAxis {
    enum class Kind { linear, quadratic };

    static CopulaAxis linear(Vector r, std::vector<double> levels);
    static CopulaAxis quadratic(Matrix c, std::vector<double> levels);

    Kind kind = Kind::linear;
    Vector r;
    Matrix c;
    std::vector<double> levels;

    int assets() const { return static_cast<int>(kind == Kind::linear ? r.size() : c.rows()); }
    int bands() const { return static_cast<int>(levels.size()) + 1; }
    double value(const Vector& lambda) const;
};

struct CopulaGrid {
    int m = 0;
    /// mass(i, j): fraction of portfolios in band i of axis 1 and band j of axis 2.
    Matrix mass;
    std::uint64_t samples = 0;
};

/// Samples n barycentric points (cfg.dimension = assets - 1) and bins them on
/// both axes. Points are drawn in 64 fixed streams, so the grid does not
/// depend on `threads`.
CopulaGrid build_copula(const CopulaAxis& axis1, const CopulaAxis& axis2, std::uint64_t n, const SamplerConfig& cfg,
                        int threads = 1);

struct IndicatorValue {
    double value = 0.0;
    /// The up-band held no mass; `value` is +infinity.
    bool infinite = false;
};

/// mass(down-band minus up-band) / mass(up-band minus down-band), where cell
/// (i, j) is in the up-band iff |i - j| <= floor(w m) and in the down-band iff
/// |i + j - (m-1)| <= floor(w m).
IndicatorValue diagonal_band_indicator(const CopulaGrid& grid, double band_width);

struct IndicatorConfig {
    std::size_t window = 60;
    double band_width = 0.10;
    int m = 100;
    std::uint64_t samples = 500000;
    std::uint64_t seed = 1;
    SamplerMethod method = SamplerMethod::exponential;
    /// Dates processed concurrently; the series does not depend on it.
    int threads = 1;
};

struct IndicatorSeries {
    std::vector<std::string> dates;
    std::vector<double> values;
    std::vector<bool> infinite;
    double band_width = 0.10;
    std::size_t window = 60;
};

enum class CopulaPair {
    /// Window compound returns against lambda^T C lambda with C the shrunk
    /// covariance of the window.
    return_variance,
    /// Window compound returns against the next window's compound returns.
    momentum,
};

struct DateCopula {
    std::string date;
    CopulaAxis axis1;
    CopulaAxis axis2;
    CopulaGrid grid;
};

/// Copula of the window ending at row t. Levels use sample stream 2t and the
/// grid stream 2t + 1, so dates are independent of each other.
DateCopula window_copula(const ReturnsMatrix& returns, const IndicatorConfig& cfg, std::size_t t, CopulaPair pair,
                         int threads = 1);

/// One value per date with a full window of history: compound returns over
/// the window against the shrunk covariance of the window.
IndicatorSeries rolling_indicator(const ReturnsMatrix& returns, const IndicatorConfig& cfg);

/// Past-window against forward-window compound returns; dated by the last
/// day of the past window.
IndicatorSeries momentum_pipeline(const ReturnsMatrix& returns, const IndicatorConfig& cfg);

struct WarningPeriod {
    std::string start_date;
    std::string end_date;
    /// Number of consecutive observations.
    std::size_t duration = 0;
};

/// Maximal runs of values > 1 lasting more than `min_days` observations.
std::vector<WarningPeriod> detect_persistent_periods(const IndicatorSeries& series, std::size_t min_days = 60);

enum class MarketRegime {
    /// Exchangeable assets: zero drift, one common volatility (1.5%).
    symmetric,
    /// Volatilities spread over [0.5%, 3%], drift -0.25 times the volatility.
    crisis,
};

struct SyntheticMarket {
    int assets = 20;
    std::size_t periods = 250;
    MarketRegime regime = MarketRegime::symmetric;
    std::uint64_t seed = 1;
    std::string start_date = "2020-01-01";
    /// Leading periods drawn from the symmetric regime before `regime` applies.
    std::size_t calm_periods = 0;
};

/// Independent Gaussian returns on business days from `start_date`.
ReturnsMatrix synthetic_returns(const SyntheticMarket& spec);

/// Threads requested by SIMPLEXSLICE_THREADS (1 when unset or invalid).
int threads_from_env();

}  // namespace sslice
