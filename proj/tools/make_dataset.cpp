// Writes a synthetic returns CSV.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "simplex_slice/errors.hpp"
#include "simplex_slice/finance.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Synthetic Gaussian returns on business days", "make-dataset"};
    sslice::SyntheticMarket spec;
    std::string regime = "symmetric";
    std::string out;
    app.add_option("--assets", spec.assets)->capture_default_str();
    app.add_option("--periods", spec.periods)->capture_default_str();
    app.add_option("--regime", regime, "symmetric | crisis")->capture_default_str();
    app.add_option("--calm-periods", spec.calm_periods, "Symmetric periods before the regime starts")->capture_default_str();
    app.add_option("--seed", spec.seed)->capture_default_str();
    app.add_option("--start-date", spec.start_date)->capture_default_str();
    app.add_option("--out", out)->required();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (regime == "symmetric") spec.regime = sslice::MarketRegime::symmetric;
        else if (regime == "crisis") spec.regime = sslice::MarketRegime::crisis;
        else throw sslice::UsageError("unknown regime '" + regime + "'");
        std::ofstream f(out);
        if (!f) throw sslice::DataError("cannot write '" + out + "'");
        sslice::write_returns_csv(f, sslice::synthetic_returns(spec));
    } catch (const sslice::Error& e) {
        std::cerr << "make-dataset: " << e.what() << "\n";
        return e.category() == sslice::ErrorCategory::usage ? 2 : 3;
    }
    return 0;
}
