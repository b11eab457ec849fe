#include "cli.hpp"

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "simplex_slice/body_io.hpp"
#include "simplex_slice/errors.hpp"
#include "simplex_slice/exact_volume.hpp"
#include "simplex_slice/finance.hpp"
#include "simplex_slice/sampling.hpp"
#include "simplex_slice/walk_volume.hpp"

#ifndef SSLICE_VERSION
#define SSLICE_VERSION "0.0.0"
#endif

namespace sslice::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(std::string("cannot open ") + what + " '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string plain_decimal(double v) {
    char buf[512];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

/// Writes `content` to `path` through a temporary file and a rename.
template <class Fill>
void write_atomic_with(const fs::path& path, Fill&& fill) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        fill(out);
        if (!out.flush()) throw DataError("cannot write '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

void write_atomic(const fs::path& path, const std::string& content) {
    write_atomic_with(path, [&](std::ostream& out) { out << content; });
}

SamplerMethod parse_sampler(const std::string& s) {
    if (s == "exponential") return SamplerMethod::exponential;
    if (s == "sorted" || s == "sorted_integers" || s == "sorted-integers") return SamplerMethod::sorted_integers;
    throw UsageError("unknown sampler '" + s + "' (exponential | sorted)");
}

const char* sampler_name(SamplerMethod m) { return m == SamplerMethod::exponential ? "exponential" : "sorted"; }

CopulaPair parse_pair(const std::string& s) {
    if (s == "return-variance") return CopulaPair::return_variance;
    if (s == "momentum") return CopulaPair::momentum;
    throw UsageError("unknown copula pair '" + s + "' (return-variance | momentum)");
}

Json vector_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// Options shared by every subcommand.
struct Common {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out_dir = ".";
    std::string config;

    void add(CLI::App* app) {
        app->add_option("--seed", seed, "Random seed (generated and recorded when absent)");
        app->add_option("--threads", threads, "Worker threads (default and cap: SIMPLEXSLICE_THREADS)")
            ->check(CLI::NonNegativeNumber);
        app->add_option("--out-dir", out_dir, "Directory for outputs and manifest.json");
        app->add_option("--config", config, "File of key=value lines; flags given on the command line win");
    }

    std::uint64_t resolved_seed() {
        if (!seed) {
            std::random_device rd;
            seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
        }
        return *seed;
    }

    int resolved_threads() const {
        int cap = 0;
        if (const char* env = std::getenv("SIMPLEXSLICE_THREADS")) cap = std::max(0, std::atoi(env));
        int t = threads > 0 ? threads : (cap > 0 ? cap : 1);
        if (cap > 0) t = std::min(t, cap);
        return std::max(t, 1);
    }

    fs::path output(const std::string& name) const {
        const fs::path p(name);
        return p.is_absolute() ? p : fs::path(out_dir) / p;
    }
};

// Manifest written before any result and completed afterwards.
class Run {
public:
    Run(std::string command, std::vector<std::string> args, Common& common)
        : command_(std::move(command)), args_(std::move(args)), common_(common), start_(Clock::now()) {}

    Json config = Json::object();

    void add_input(const std::string& path, const std::string& bytes) {
        inputs_.push_back({{"path", path}, {"fnv1a64", fnv1a64_hex(bytes)}, {"bytes", bytes.size()}});
    }
    void add_output(const fs::path& p) { outputs_.push_back(p.string()); }

    double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

    void begin() { write(false); }
    void finish() { write(true); }

private:
    void write(bool complete) {
        Json m;
        m["tool"] = "simplex-slice";
        m["version"] = SSLICE_VERSION;
        m["command"] = command_;
        m["argv"] = args_;
        m["config"] = config;
        m["seeds"] = {{"seed", common_.resolved_seed()}};
        m["threads"] = common_.resolved_threads();
        m["versions"] = {{"simplex_slice", SSLICE_VERSION},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                       std::to_string(EIGEN_MINOR_VERSION)},
                         {"gmp", gmp_version},
                         {"mpfr", mpfr_get_version()},
                         {"compiler", __VERSION__}};
        m["inputs"] = inputs_;
        m["outputs"] = outputs_;
        m["status"] = complete ? "complete" : "running";
        if (complete) m["wall_time_seconds"] = elapsed();
        write_atomic(common_.output("manifest.json"), m.dump(2) + "\n");
    }

    std::string command_;
    std::vector<std::string> args_;
    Common& common_;
    Clock::time_point start_;
    Json inputs_ = Json::array();
    Json outputs_ = Json::array();
};

// ---------------------------------------------------------------------------
// volume

struct VolumeArgs {
    std::string body;
    std::string method = "auto";
    std::string backend = "auto";
    double epsilon = 0.5;
    int walk_length = 0;
    std::uint64_t points = 0;
    std::uint64_t samples = 0;
    double error = 0.05;
    std::string sampler = "exponential";
    bool allow_nonconvex_high_d = false;
    int max_dimension_nonconvex = 35;
    std::string out = "result.json";
};

std::string count_summary(const BodySpec& spec) {
    return std::to_string(spec.halfspaces.size()) + " halfspace(s) and " + std::to_string(spec.ellipsoids.size()) +
           " ellipsoid(s)";
}

bool fits_lawrence(const BodySpec& spec, const StandardizedBody& sb) {
    if (!spec.ellipsoids.empty() || spec.dimension > 100) return false;
    try {
        group_into_families(spec.dimension, sb.body.halfspaces());
        return true;
    } catch (const UsageError&) {
        return false;
    }
}

void volume_varsi(const BodySpec& spec, const StandardizedBody& sb, Json& r) {
    if (spec.halfspaces.size() != 1 || !spec.ellipsoids.empty())
        throw UsageError("method varsi needs exactly one halfspace and no ellipsoids; the body has " + count_summary(spec));
    const double fraction = varsi_fraction(sb.body.halfspaces()[0], spec.dimension).value;
    r["fraction"] = fraction;
    r["value"] = fraction * unit_simplex_volume(spec.dimension) * sb.scale;
}

void volume_lawrence(const BodySpec& spec, const StandardizedBody& sb, const VolumeArgs& a, std::uint64_t seed, Json& r) {
    if (!spec.ellipsoids.empty())
        throw UsageError("method lawrence needs a body without ellipsoids; the body has " + count_summary(spec));
    Backend backend = spec.dimension > 30 ? Backend::rational : Backend::floating;
    if (a.backend == "float") backend = Backend::floating;
    else if (a.backend == "rational") backend = Backend::rational;
    else if (a.backend != "auto") throw UsageError("unknown backend '" + a.backend + "' (float | rational | auto)");

    LawrenceOptions opts;
    opts.backend = backend;
    opts.seed = seed;
    ExactVolume v;
    try {
        if (backend == Backend::rational) {
            const auto exact = to_exact_band_polytope(spec);
            v = lawrence_volume(exact.polytope, opts);
            const Rational value = *v.exact * exact.scale;
            r["value"] = to_double(value);
            r["value_decimal"] = to_scientific(value, 17);
            r["value_exact"] = value.get_str();
        } else {
            v = lawrence_volume(group_into_families(spec.dimension, sb.body.halfspaces()), opts);
            r["value"] = v.value * sb.scale;
        }
    } catch (const DegenerateInput& e) {
        throw DegenerateInput(std::string(e.what()) + "; the polytope is not simple. Perturb the offset z of " +
                                  e.constraint + " by about 1e-9*|z| and rerun",
                              e.constraint);
    }
    r["backend"] = backend == Backend::rational ? "rational" : "float";
    r["vertex_count"] = v.vertex_count;
    r["objective_attempts"] = v.attempts;
    r["objective"] = v.c;
}

SamplerConfig sampler_config(const VolumeArgs& a, int d, std::uint64_t seed) {
    SamplerConfig sc;
    sc.method = parse_sampler(a.sampler);
    sc.seed = seed;
    sc.dimension = d;
    return sc;
}

void volume_rejection(const BodySpec& spec, const StandardizedBody& sb, const VolumeArgs& a, std::uint64_t seed,
                      std::optional<int> p_order, Json& r) {
    const int d = spec.dimension;
    SamplerConfig sc = sampler_config(a, d, seed);
    std::uint64_t n = a.samples;
    if (n == 0) {
        sc.stream = 1;
        const int order = p_order ? *p_order : estimate_p_order(sb.body, sc);
        const auto req = required_samples(a.error, order);
        n = req.samples;
        r["p_order"] = order;
        r["target_error"] = a.error;
        r["confidence"] = req.confidence;
    }
    sc.stream = 0;
    const auto est = rejection_volume(sb.body, n, sc, unit_simplex_volume(d) * sb.scale);
    r["value"] = est.abs_volume;
    r["fraction"] = est.volume_fraction;
    r["hits"] = est.hits;
    r["trials"] = est.trials;
    r["std_error"] = est.std_error;
    r["below_resolution"] = est.below_resolution;
    r["sampler"] = sampler_name(sc.method);
}

void volume_walk(const StandardizedBody& sb, const VolumeArgs& a, std::uint64_t seed, int threads,
                 bool nonconvex, Json& r) {
    if (nonconvex && sb.body.is_convex())
        throw UsageError("method nonconvex needs a shell body (an outside ellipsoid); this body is convex, use hnr");
    if (!nonconvex && !sb.body.is_convex())
        throw UsageError("method hnr needs a convex body; this body keeps the outside of an ellipsoid, use nonconvex");
    WalkConfig cfg;
    cfg.epsilon = a.epsilon;
    cfg.walk_length = a.walk_length;
    cfg.points_per_phase = a.points;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.allow_nonconvex_high_d = a.allow_nonconvex_high_d;
    cfg.max_dimension_nonconvex = a.max_dimension_nonconvex;
    const VolumeEstimate est = nonconvex ? volume_nonconvex(sb.body, cfg) : volume_hnr(sb.body, cfg);
    r["value"] = est.value * sb.scale;
    r["unit_frame_value"] = est.value;
    r["phase_ratios"] = est.phase_ratios;
    r["phases"] = est.phase_ratios.size();
    r["points_per_phase"] = est.points_per_phase;
    r["walk_length"] = est.walk_length;
    r["epsilon"] = est.epsilon;
    r["total_steps"] = est.total_steps;
    r["inscribed_ball"] = {{"center", vector_json(est.inscribed.center)}, {"radius", est.inscribed.radius}};
    r["enclosing_radius"] = est.enclosing_radius;
    r["zero_ratio"] = est.zero_ratio;
    r["empty"] = est.empty;
    r["experimental"] = est.experimental;
}

int cmd_volume(const std::vector<std::string>& args, Common& common, const VolumeArgs& a) {
    Run run("volume", args, common);
    const std::string bytes = read_file(a.body, "body file");
    run.add_input(a.body, bytes);
    if (!common.config.empty()) run.add_input(common.config, read_file(common.config, "config file"));
    const BodySpec spec = parse_body_json(bytes);
    const StandardizedBody sb = to_standardized(spec);
    const std::uint64_t seed = common.resolved_seed();
    const int threads = common.resolved_threads();

    run.config = {{"body", a.body},           {"method", a.method},
                  {"backend", a.backend},     {"epsilon", a.epsilon},
                  {"walk_length", a.walk_length}, {"points", a.points},
                  {"samples", a.samples},     {"error", a.error},
                  {"sampler", a.sampler},     {"allow_nonconvex_high_d", a.allow_nonconvex_high_d},
                  {"max_dimension_nonconvex", a.max_dimension_nonconvex},
                  {"out", a.out},             {"seed", seed},
                  {"threads", threads},       {"out_dir", common.out_dir}};
    const fs::path out = common.output(a.out);
    run.begin();

    std::string method = a.method;
    std::optional<int> p_order;
    Json r;
    if (method == "auto") {
        if (spec.ellipsoids.empty() && spec.halfspaces.size() == 1) {
            method = "varsi";
        } else if (fits_lawrence(spec, sb)) {
            method = "lawrence";
        } else {
            SamplerConfig sc = sampler_config(a, spec.dimension, seed);
            sc.stream = 1;
            p_order = estimate_p_order(sb.body, sc);
            if (*p_order >= 3) method = sb.body.is_convex() ? "hnr" : "nonconvex";
            else method = "rejection";
            r["auto_pilot_p_order"] = *p_order;
        }
    }
    Json result;
    result["method"] = method;
    result["requested_method"] = a.method;
    result["dimension"] = spec.dimension;
    result["seed"] = seed;
    result["simplex_volume"] = unit_simplex_volume(spec.dimension) * sb.scale;

    if (method == "varsi") volume_varsi(spec, sb, result);
    else if (method == "lawrence") volume_lawrence(spec, sb, a, seed, result);
    else if (method == "rejection") volume_rejection(spec, sb, a, seed, p_order, result);
    else if (method == "hnr") volume_walk(sb, a, seed, threads, false, result);
    else if (method == "nonconvex") volume_walk(sb, a, seed, threads, true, result);
    else throw UsageError("unknown method '" + method + "' (auto | varsi | lawrence | rejection | hnr | nonconvex)");

    for (auto& [k, v] : r.items()) result[k] = v;
    result["wall_time_seconds"] = run.elapsed();
    write_atomic(out, result.dump(2) + "\n");
    run.add_output(out);
    run.finish();
    std::cout << result["value"].dump() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
    int dim = 0;
    std::uint64_t n = 0;
    std::string method = "exponential";
    std::string out = "points.csv";
};

int cmd_sample(const std::vector<std::string>& args, Common& common, const SampleArgs& a) {
    Run run("sample", args, common);
    if (!common.config.empty()) run.add_input(common.config, read_file(common.config, "config file"));
    SamplerConfig sc;
    sc.method = parse_sampler(a.method);
    sc.seed = common.resolved_seed();
    sc.dimension = a.dim;
    run.config = {{"dim", a.dim},   {"n", a.n},     {"method", sampler_name(sc.method)}, {"out", a.out},
                  {"seed", sc.seed}, {"threads", 1}, {"out_dir", common.out_dir}};
    const fs::path out = common.output(a.out);
    run.begin();

    UnitSimplexSampler sampler(sc);
    Vector x(a.dim);
    write_atomic_with(out, [&](std::ostream& os) {
        std::string row;
        for (std::uint64_t i = 0; i < a.n; ++i) {
            sampler.next(x);
            row.clear();
            for (int k = 0; k < a.dim; ++k) {
                if (k) row.push_back(',');
                row += plain_decimal(x(k));
            }
            row.push_back('\n');
            os << row;
        }
    });
    run.add_output(out);
    run.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// copula and indicator

struct FinanceArgs {
    std::string returns;
    std::string pair = "return-variance";
    std::size_t window = 60;
    int m = 100;
    std::uint64_t n = 500000;
    double band = 0.10;
    std::string sampler = "exponential";
    std::string date;
    std::size_t min_days = 60;
    std::string out;
    std::string warnings = "warnings.csv";
};

IndicatorConfig indicator_config(const FinanceArgs& a, std::uint64_t seed, int threads) {
    IndicatorConfig cfg;
    cfg.window = a.window;
    cfg.band_width = a.band;
    cfg.m = a.m;
    cfg.samples = a.n;
    cfg.seed = seed;
    cfg.method = parse_sampler(a.sampler);
    cfg.threads = threads;
    return cfg;
}

Json finance_config(const FinanceArgs& a, const Common& common, std::uint64_t seed, int threads) {
    return {{"returns", a.returns}, {"pair", a.pair},       {"window", a.window},       {"m", a.m},
            {"n", a.n},             {"band", a.band},       {"sampler", a.sampler},     {"seed", seed},
            {"threads", threads},   {"out_dir", common.out_dir}};
}

Json axis_json(const char* name, const CopulaAxis& axis) {
    return {{"name", name},
            {"kind", axis.kind == CopulaAxis::Kind::linear ? "linear" : "quadratic"},
            {"levels", axis.levels}};
}

int cmd_copula(const std::vector<std::string>& args, Common& common, const FinanceArgs& a) {
    Run run("copula", args, common);
    const std::string bytes = read_file(a.returns, "returns file");
    run.add_input(a.returns, bytes);
    if (!common.config.empty()) run.add_input(common.config, read_file(common.config, "config file"));
    std::istringstream in(bytes);
    const ReturnsMatrix returns = parse_returns_csv(in);
    const std::uint64_t seed = common.resolved_seed();
    const int threads = common.resolved_threads();
    const CopulaPair pair = parse_pair(a.pair);
    const IndicatorConfig cfg = indicator_config(a, seed, threads);

    std::size_t t = 0;
    if (a.date.empty()) {
        const std::size_t needed = pair == CopulaPair::momentum ? 2 * a.window : a.window;
        if (returns.periods() < needed) throw UsageError("copula: the returns file is shorter than the window(s)");
        t = pair == CopulaPair::momentum ? returns.periods() - a.window - 1 : returns.periods() - 1;
    } else {
        const auto it = std::find(returns.dates.begin(), returns.dates.end(), a.date);
        if (it == returns.dates.end()) throw DataError("copula: date " + a.date + " is not in the returns file");
        t = static_cast<std::size_t>(it - returns.dates.begin());
    }

    const std::string out_name = a.out.empty() ? "copula.csv" : a.out;
    const fs::path out = common.output(out_name);
    fs::path sidecar = out;
    sidecar.replace_extension(".json");
    run.config = finance_config(a, common, seed, threads);
    run.config["date"] = returns.dates[t];
    run.config["out"] = out_name;
    run.begin();

    const DateCopula copula = window_copula(returns, cfg, t, pair, threads);
    std::string csv;
    double total = 0.0;
    for (int i = 0; i < copula.grid.m; ++i) {
        for (int j = 0; j < copula.grid.m; ++j) {
            if (j) csv.push_back(',');
            csv += shortest(copula.grid.mass(i, j));
            total += copula.grid.mass(i, j);
        }
        csv.push_back('\n');
    }
    const IndicatorValue ind = diagonal_band_indicator(copula.grid, a.band);
    Json side;
    side["date"] = copula.date;
    side["pair"] = a.pair;
    side["window"] = a.window;
    side["assets"] = returns.asset_count();
    side["m"] = copula.grid.m;
    side["n"] = copula.grid.samples;
    side["seed"] = seed;
    side["sampler"] = a.sampler;
    side["rows"] = "axis 1 band (lowest first)";
    side["columns"] = "axis 2 band (lowest first)";
    side["axes"] = {axis_json("compound_return", copula.axis1),
                    axis_json(pair == CopulaPair::momentum ? "forward_compound_return" : "variance", copula.axis2)};
    side["mass_sum"] = total;
    side["band_width"] = a.band;
    side["indicator"] = finite_or_null(ind.value);
    write_atomic(out, csv);
    write_atomic(sidecar, side.dump(2) + "\n");
    run.add_output(out);
    run.add_output(sidecar);
    run.finish();
    return 0;
}

int cmd_indicator(const std::vector<std::string>& args, Common& common, const FinanceArgs& a) {
    Run run("indicator", args, common);
    const std::string bytes = read_file(a.returns, "returns file");
    run.add_input(a.returns, bytes);
    if (!common.config.empty()) run.add_input(common.config, read_file(common.config, "config file"));
    std::istringstream in(bytes);
    const ReturnsMatrix returns = parse_returns_csv(in);
    const std::uint64_t seed = common.resolved_seed();
    const int threads = common.resolved_threads();
    const CopulaPair pair = parse_pair(a.pair);
    const IndicatorConfig cfg = indicator_config(a, seed, threads);

    const std::string out_name = a.out.empty() ? "indicator.csv" : a.out;
    const fs::path out = common.output(out_name);
    const fs::path warn = common.output(a.warnings);
    run.config = finance_config(a, common, seed, threads);
    run.config["min_days"] = a.min_days;
    run.config["out"] = out_name;
    run.config["warnings"] = a.warnings;
    run.begin();

    const IndicatorSeries series =
        pair == CopulaPair::momentum ? momentum_pipeline(returns, cfg) : rolling_indicator(returns, cfg);
    std::string csv = "date,value\n";
    for (std::size_t i = 0; i < series.dates.size(); ++i)
        csv += series.dates[i] + "," + (series.infinite[i] ? std::string("inf") : shortest(series.values[i])) + "\n";
    std::string wcsv = "start,end,duration\n";
    for (const auto& p : detect_persistent_periods(series, a.min_days))
        wcsv += p.start_date + "," + p.end_date + "," + std::to_string(p.duration) + "\n";
    write_atomic(out, csv);
    write_atomic(warn, wcsv);
    run.add_output(out);
    run.add_output(warn);
    run.finish();
    return 0;
}

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::usage: return 2;
        case ErrorCategory::data: return 3;
        case ErrorCategory::numerical: return 4;
    }
    return 1;
}

std::string config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return {};
}

}  // namespace

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> apply_config(const std::vector<std::string>& args, const std::string& config_text) {
    std::vector<std::string> extra;
    std::istringstream in(config_text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        if (key == "config") throw UsageError("config files cannot include other config files");
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(),
                                       [&](const std::string& s) { return s == flag || s.rfind(flag + "=", 0) == 0; });
        if (given) continue;
        if (value == "true") extra.push_back(flag);
        else if (value != "false") {
            extra.push_back(flag);
            extra.push_back(value);
        }
    }
    std::vector<std::string> out;
    if (args.empty()) return extra;
    out.push_back(args[0]);
    out.insert(out.end(), extra.begin(), extra.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

int run(const std::vector<std::string>& raw_args) {
    CLI::App app{"Volumes of simplex slices and portfolio copulas", "simplex-slice"};
    app.set_version_flag("--version", SSLICE_VERSION);
    app.require_subcommand(1);

    Common common;
    VolumeArgs va;
    SampleArgs sa;
    FinanceArgs fa;

    auto* volume = app.add_subcommand("volume", "Volume of a body (simplex with halfspaces and ellipsoids)");
    common.add(volume);
    volume->add_option("--body", va.body, "Body definition (JSON)")->required();
    volume->add_option("--method", va.method, "auto | varsi | lawrence | rejection | hnr | nonconvex")->capture_default_str();
    volume->add_option("--backend", va.backend, "Lawrence arithmetic: auto | float | rational")->capture_default_str();
    volume->add_option("--epsilon", va.epsilon, "Hit-and-run target error")->capture_default_str();
    volume->add_option("--walk-length", va.walk_length, "Hit-and-run steps between points (0: ceil(ln d) + 10)");
    volume->add_option("--points", va.points, "Hit-and-run points per phase (0: default rule)");
    volume->add_option("--samples", va.samples, "Rejection samples (0: from --error and a pilot run)");
    volume->add_option("--error", va.error, "Rejection target relative error")->capture_default_str();
    volume->add_option("--sampler", va.sampler, "exponential | sorted")->capture_default_str();
    volume->add_flag("--allow-nonconvex-high-d", va.allow_nonconvex_high_d, "Run nonconvex walks above the dimension cap");
    volume->add_option("--max-dimension-nonconvex", va.max_dimension_nonconvex, "Dimension cap for nonconvex walks")
        ->capture_default_str();
    volume->add_option("--out", va.out, "Result JSON (relative to --out-dir)")->capture_default_str();

    auto* sample = app.add_subcommand("sample", "Uniform points of the unit simplex");
    common.add(sample);
    sample->add_option("--dim", sa.dim, "Dimension d")->required()->check(CLI::PositiveNumber);
    sample->add_option("--n", sa.n, "Number of points")->required()->check(CLI::PositiveNumber);
    sample->add_option("--method", sa.method, "exponential | sorted")->capture_default_str();
    sample->add_option("--out", sa.out, "CSV, one point per row")->capture_default_str();

    auto add_finance = [&](CLI::App* sub) {
        common.add(sub);
        sub->add_option("--returns", fa.returns, "Returns CSV (date,ASSET1,...)")->required();
        sub->add_option("--pair", fa.pair, "return-variance | momentum")->capture_default_str();
        sub->add_option("--window", fa.window, "Window length in periods")->capture_default_str();
        sub->add_option("--m", fa.m, "Bands per axis")->capture_default_str();
        sub->add_option("--n", fa.n, "Portfolios sampled per copula")->capture_default_str();
        sub->add_option("--band", fa.band, "Diagonal band width as a fraction of m")->capture_default_str();
        sub->add_option("--sampler", fa.sampler, "exponential | sorted")->capture_default_str();
    };
    auto* copula = app.add_subcommand("copula", "Copula of one window");
    add_finance(copula);
    copula->add_option("--date", fa.date, "Last date of the window (default: latest possible)");
    copula->add_option("--out", fa.out, "Grid CSV; the sidecar JSON takes the same name");

    auto* indicator = app.add_subcommand("indicator", "Rolling crisis indicator and warning periods");
    add_finance(indicator);
    indicator->add_option("--min-days", fa.min_days, "Warnings need runs above 1 longer than this")->capture_default_str();
    indicator->add_option("--out", fa.out, "date,value CSV (default indicator.csv)");
    indicator->add_option("--warnings", fa.warnings, "Warning periods CSV")->capture_default_str();

    try {
        std::vector<std::string> args = raw_args;
        const std::string cfg = config_path(args);
        if (!cfg.empty()) args = apply_config(args, read_file(cfg, "config file"));

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }
        if (*volume) return cmd_volume(args, common, va);
        if (*sample) return cmd_sample(args, common, sa);
        if (*copula) return cmd_copula(args, common, fa);
        if (*indicator) return cmd_indicator(args, common, fa);
        return 2;
    } catch (const Error& e) {
        std::cerr << "simplex-slice: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "simplex-slice: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "simplex-slice: internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sslice::cli
