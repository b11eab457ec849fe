#include "simplex_slice/finance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "simplex_slice/exact_volume.hpp"
#include "simplex_slice/rng.hpp"

namespace sslice {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw DataError("returns: bad value '" + cell + "' at row " + std::to_string(row) + ", column " +
                        std::to_string(col));
    }
    return v;
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers with a fixed
/// index-to-worker assignment.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

constexpr std::uint64_t kSampleChunks = 64;

/// Calls visit(chunk, lambda) for n uniform barycentric points drawn in 64
/// streams derived from cfg.stream.
template <class Visit>
void sample_barycentric_chunks(std::uint64_t n, const SamplerConfig& cfg, int threads, Visit&& visit) {
    parallel_for(kSampleChunks, threads, [&](std::size_t c) {
        SamplerConfig sc = cfg;
        sc.stream = (cfg.stream << 8) | c;
        UnitSimplexSampler sampler(sc);
        Vector lambda(cfg.dimension + 1);
        const std::uint64_t from = n * c / kSampleChunks;
        const std::uint64_t to = n * (c + 1) / kSampleChunks;
        for (std::uint64_t j = from; j < to; ++j) {
            sampler.next_barycentric(lambda);
            visit(c, j, lambda);
        }
    });
}

}  // namespace

ReturnsMatrix parse_returns_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("returns: empty input");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "date") throw DataError("returns: header must be date,ASSET1,...");
    ReturnsMatrix out;
    out.assets.assign(header.begin() + 1, header.end());
    const std::size_t cols = out.assets.size();
    std::vector<std::vector<double>> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != cols + 1) {
            throw DataError("returns: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(cols + 1));
        }
        if (!is_iso_date(cells[0])) throw DataError("returns: bad date '" + cells[0] + "' at row " + std::to_string(row));
        if (!out.dates.empty() && !(out.dates.back() < cells[0])) {
            throw DataError("returns: dates must be strictly increasing (row " + std::to_string(row) + ")");
        }
        std::vector<double> values(cols);
        for (std::size_t j = 0; j < cols; ++j) {
            values[j] = parse_number(cells[j + 1], row, j + 1);
            if (!(values[j] > -1.0)) {
                throw DataError("returns: value <= -1 at row " + std::to_string(row) + ", column " +
                                std::to_string(j + 1));
            }
        }
        out.dates.push_back(cells[0]);
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw DataError("returns: no data rows");
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return out;
}

ReturnsMatrix read_returns_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("returns: cannot open " + path);
    return parse_returns_csv(in);
}

void write_returns_csv(std::ostream& out, const ReturnsMatrix& returns) {
    out << "date";
    for (const auto& a : returns.assets) out << ',' << a;
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < returns.periods(); ++i) {
        out << returns.dates[i];
        for (int j = 0; j < returns.asset_count(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof buf, returns.values(static_cast<Eigen::Index>(i), j));
            out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
}

Vector compound_returns(const ReturnsMatrix& returns, std::size_t start, std::size_t k) {
    if (k == 0) throw UsageError("compound_returns: window must be positive");
    if (start + k > returns.periods()) {
        throw UsageError("compound_returns: window [" + std::to_string(start) + ", " + std::to_string(start + k) +
                         ") exceeds " + std::to_string(returns.periods()) + " periods");
    }
    Vector growth = Vector::Ones(returns.asset_count());
    for (std::size_t i = start; i < start + k; ++i) {
        growth.array() *= 1.0 + returns.values.row(static_cast<Eigen::Index>(i)).transpose().array();
    }
    return growth.array() - 1.0;
}

Shrinkage shrink_covariance(const Matrix& window) {
    const Eigen::Index n = window.rows();
    const Eigen::Index p = window.cols();
    if (n < 2) throw UsageError("shrink_covariance: window needs at least two observations");
    const Matrix x = window.rowwise() - window.colwise().mean();
    const Matrix s = x.transpose() * x / static_cast<double>(n);
    const double mu = s.trace() / static_cast<double>(p);
    if (!(mu > 0.0)) throw DataError("shrink_covariance: window has no variation");

    const Matrix target = mu * Matrix::Identity(p, p);
    const double d2 = (s - target).squaredNorm() / static_cast<double>(p);
    double b2 = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const Vector row = x.row(t).transpose();
        b2 += (row * row.transpose() - s).squaredNorm() / static_cast<double>(p);
    }
    b2 /= static_cast<double>(n) * static_cast<double>(n);
    double delta = d2 > 0.0 ? std::min(b2, d2) / d2 : 1.0;
    delta = std::clamp(delta, 1e-4, 1.0);

    Shrinkage out;
    out.intensity = delta;
    out.covariance = delta * target + (1.0 - delta) * s;
    return out;
}

HyperplaneFamily hyperplane_levels(const Vector& vertex_values, int m, double tol) {
    if (m < 2) throw UsageError("hyperplane_levels: need at least two bands");
    if (vertex_values.size() < 2) throw UsageError("hyperplane_levels: need at least two assets");
    std::vector<double> values(vertex_values.data(), vertex_values.data() + vertex_values.size());
    std::vector<double> levels;
    levels.reserve(static_cast<std::size_t>(m - 1));
    for (int i = 1; i < m; ++i) {
        const auto search = bisect_level_for_fraction(values, static_cast<double>(i) / m, 0.5 * tol);
        if (!levels.empty() && !(search.level > levels.back())) {
            throw NumericalFailure("hyperplane_levels: bisection could not separate levels " + std::to_string(i - 1) +
                                   " and " + std::to_string(i));
        }
        levels.push_back(search.level);
    }
    return HyperplaneFamily(vertex_values, std::move(levels));
}

std::vector<double> ellipsoid_levels(const Matrix& c, int m, std::uint64_t n, const SamplerConfig& cfg) {
    if (m < 2) throw UsageError("ellipsoid_levels: need at least two bands");
    if (n < 100 * static_cast<std::uint64_t>(m)) throw UsageError("ellipsoid_levels: need n >= 100 m samples");
    if (c.rows() != cfg.dimension + 1 || c.cols() != c.rows()) {
        throw DimensionMismatch("ellipsoid_levels: matrix must be (d+1) x (d+1)");
    }
    std::vector<double> values(n);
    sample_barycentric_chunks(n, cfg, 1, [&](std::size_t, std::uint64_t j, const Vector& lambda) {
        values[j] = lambda.dot(c * lambda);
    });
    std::sort(values.begin(), values.end());
    std::vector<double> levels;
    for (int i = 1; i < m; ++i) {
        const auto rank = (static_cast<std::uint64_t>(i) * n + static_cast<std::uint64_t>(m) - 1) / static_cast<std::uint64_t>(m);
        levels.push_back(values[rank - 1]);
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i] > levels[i - 1])) throw NumericalFailure("ellipsoid_levels: repeated quantile value");
    }
    return levels;
}

CopulaAxis CopulaAxis::linear(Vector r, std::vector<double> levels) {
    CopulaAxis a;
    a.kind = Kind::linear;
    a.r = std::move(r);
    a.levels = std::move(levels);
    return a;
}

CopulaAxis CopulaAxis::quadratic(Matrix c, std::vector<double> levels) {
    CopulaAxis a;
    a.kind = Kind::quadratic;
    a.c = std::move(c);
    a.levels = std::move(levels);
    return a;
}

double CopulaAxis::value(const Vector& lambda) const {
    return kind == Kind::linear ? r.dot(lambda) : lambda.dot(c * lambda);
}

CopulaGrid build_copula(const CopulaAxis& axis1, const CopulaAxis& axis2, std::uint64_t n, const SamplerConfig& cfg,
                        int threads) {
    if (n == 0) throw UsageError("build_copula: need at least one sample");
    if (axis1.bands() != axis2.bands()) throw UsageError("build_copula: both axes need the same band count");
    if (axis1.assets() != cfg.dimension + 1 || axis2.assets() != cfg.dimension + 1) {
        throw DimensionMismatch("build_copula: axes must have d+1 assets");
    }
    const int m = axis1.bands();
    std::vector<Matrix> counts(kSampleChunks, Matrix::Zero(m, m));
    sample_barycentric_chunks(n, cfg, threads, [&](std::size_t chunk, std::uint64_t, const Vector& lambda) {
        const auto i = band_index(axis1.levels, axis1.value(lambda));
        const auto j = band_index(axis2.levels, axis2.value(lambda));
        counts[chunk](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 1.0;
    });
    CopulaGrid grid;
    grid.m = m;
    grid.samples = n;
    grid.mass = Matrix::Zero(m, m);
    for (const auto& c : counts) grid.mass += c;
    grid.mass /= static_cast<double>(n);
    return grid;
}

IndicatorValue diagonal_band_indicator(const CopulaGrid& grid, double band_width) {
    if (!(band_width > 0.0 && band_width < 0.5)) throw UsageError("diagonal_band_indicator: band width must be in (0, 0.5)");
    const int m = grid.m;
    const int w = static_cast<int>(std::floor(band_width * m));
    double up = 0.0;
    double down = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const bool in_up = std::abs(i - j) <= w;
            const bool in_down = std::abs(i + j - (m - 1)) <= w;
            if (in_up && !in_down) up += grid.mass(i, j);
            if (in_down && !in_up) down += grid.mass(i, j);
        }
    }
    if (up == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {down / up, false};
}

DateCopula window_copula(const ReturnsMatrix& returns, const IndicatorConfig& cfg, std::size_t t, CopulaPair pair,
                         int threads) {
    const std::size_t k = cfg.window;
    if (k < 2 || t + 1 < k || t >= returns.periods()) throw UsageError("window_copula: window does not fit before the date");
    if (pair == CopulaPair::momentum && t + k >= returns.periods())
        throw UsageError("window_copula: forward window runs past the data");
    const int d = returns.asset_count() - 1;
    const double tol = 1e-6;
    const std::size_t start = t + 1 - k;

    DateCopula out;
    out.date = returns.dates[t];
    const Vector past = compound_returns(returns, start, k);
    out.axis1 = CopulaAxis::linear(past, hyperplane_levels(past, cfg.m, tol).offsets);
    SamplerConfig sc;
    sc.dimension = d;
    sc.seed = cfg.seed;
    sc.method = cfg.method;
    if (pair == CopulaPair::momentum) {
        const Vector forward = compound_returns(returns, t + 1, k);
        out.axis2 = CopulaAxis::linear(forward, hyperplane_levels(forward, cfg.m, tol).offsets);
    } else {
        const Matrix window = returns.values.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(k));
        Matrix cov = shrink_covariance(window).covariance;
        sc.stream = 2 * static_cast<std::uint64_t>(t);
        const auto levels =
            ellipsoid_levels(cov, cfg.m, std::max<std::uint64_t>(cfg.samples, 100 * static_cast<std::uint64_t>(cfg.m)), sc);
        out.axis2 = CopulaAxis::quadratic(std::move(cov), levels);
    }
    sc.stream = 2 * static_cast<std::uint64_t>(t) + 1;
    out.grid = build_copula(out.axis1, out.axis2, cfg.samples, sc, threads);
    return out;
}

namespace {

IndicatorSeries run_series(const ReturnsMatrix& returns, const IndicatorConfig& cfg, std::size_t first,
                           std::size_t last, CopulaPair pair) {
    IndicatorSeries series;
    series.band_width = cfg.band_width;
    series.window = cfg.window;
    if (last < first) return series;
    const std::size_t count = last - first + 1;
    series.dates.resize(count);
    series.values.resize(count);
    series.infinite.resize(count);

    parallel_for(count, cfg.threads, [&](std::size_t idx) {
        const auto copula = window_copula(returns, cfg, first + idx, pair, 1);
        const auto ind = diagonal_band_indicator(copula.grid, cfg.band_width);
        series.dates[idx] = copula.date;
        series.values[idx] = ind.value;
        series.infinite[idx] = ind.infinite;
    });
    return series;
}

void check_indicator_config(const ReturnsMatrix& returns, const IndicatorConfig& cfg, std::size_t needed) {
    if (cfg.window < 2) throw UsageError("indicator: window must be at least 2");
    if (returns.asset_count() < 2) throw UsageError("indicator: need at least two assets");
    if (needed > returns.periods()) {
        throw UsageError("indicator: need " + std::to_string(needed) + " periods, data has " +
                         std::to_string(returns.periods()));
    }
}

}  // namespace

IndicatorSeries rolling_indicator(const ReturnsMatrix& returns, const IndicatorConfig& cfg) {
    check_indicator_config(returns, cfg, cfg.window);
    return run_series(returns, cfg, cfg.window - 1, returns.periods() - 1, CopulaPair::return_variance);
}

IndicatorSeries momentum_pipeline(const ReturnsMatrix& returns, const IndicatorConfig& cfg) {
    check_indicator_config(returns, cfg, 2 * cfg.window);
    return run_series(returns, cfg, cfg.window - 1, returns.periods() - cfg.window - 1, CopulaPair::momentum);
}

std::vector<WarningPeriod> detect_persistent_periods(const IndicatorSeries& series, std::size_t min_days) {
    std::vector<WarningPeriod> out;
    const std::size_t n = series.values.size();
    std::size_t i = 0;
    while (i < n) {
        if (!(series.values[i] > 1.0)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && series.values[j] > 1.0) ++j;
        if (j - i > min_days) out.push_back({series.dates[i], series.dates[j - 1], j - i});
        i = j;
    }
    return out;
}

namespace {

/// Days since 1970-01-01 of a proleptic Gregorian date and back.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(y), m, d);
    return buf;
}

}  // namespace

ReturnsMatrix synthetic_returns(const SyntheticMarket& spec) {
    if (spec.assets < 2 || spec.periods < 1) throw UsageError("synthetic_returns: need >= 2 assets and >= 1 period");
    if (!is_iso_date(spec.start_date)) throw UsageError("synthetic_returns: bad start date");
    RandomStream rng(spec.seed, 0);
    const int p = spec.assets;
    Vector sigma(p);
    for (int j = 0; j < p; ++j) sigma(j) = 0.005 + 0.025 * static_cast<double>(j) / (p - 1);
    // Shuffle so the column order carries no information.
    for (int j = p - 1; j > 0; --j) {
        std::swap(sigma(j), sigma(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(j + 1)))));
    }
    Vector drift = Vector::Zero(p);
    if (spec.regime == MarketRegime::crisis) {
        drift = -0.25 * sigma;
    } else {
        sigma.setConstant(0.015);
    }
    const Vector calm_sigma = Vector::Constant(p, 0.015);

    ReturnsMatrix out;
    for (int j = 0; j < p; ++j) out.assets.push_back("A" + std::to_string(j + 1));
    out.values.resize(static_cast<Eigen::Index>(spec.periods), p);
    std::int64_t day = days_from_civil(std::stoi(spec.start_date.substr(0, 4)),
                                       static_cast<unsigned>(std::stoi(spec.start_date.substr(5, 2))),
                                       static_cast<unsigned>(std::stoi(spec.start_date.substr(8, 2))));
    for (std::size_t t = 0; t < spec.periods; ++t) {
        // 1970-01-01 was a Thursday; skip Saturdays (2) and Sundays (3).
        while (((day % 7) + 7) % 7 == 2 || ((day % 7) + 7) % 7 == 3) ++day;
        out.dates.push_back(civil_from_days(day));
        ++day;
        const bool calm = t < spec.calm_periods;
        for (int j = 0; j < p; ++j) {
            out.values(static_cast<Eigen::Index>(t), j) =
                calm ? calm_sigma(j) * rng.normal() : drift(j) + sigma(j) * rng.normal();
        }
    }
    return out;
}

int threads_from_env() {
    const char* env = std::getenv("SIMPLEXSLICE_THREADS");
    if (env == nullptr) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) return 1;
    return static_cast<int>(std::min<long>(v, 256));
}

}  // namespace sslice
