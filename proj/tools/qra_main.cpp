// qra: probabilistic electricity-price forecasting pipeline.
// Subcommands: fetch (market data), point (rolling point forecasts),
// backtest (quantile-regression-averaging variants), evaluate (metrics from an
// existing surface).

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "qra/backtest.hpp"
#include "qra/csvio.hpp"
#include "qra/entsoe.hpp"
#include "qra/pointmodel.hpp"
#include "qra/synthetic.hpp"

namespace {

using nlohmann::json;

constexpr int kExitAuth = 2;
constexpr int kExitNetwork = 3;
constexpr int kExitParse = 4;
constexpr int kExitSolver = 5;

struct FetchArgs {
    std::string token;
    std::string domain = "10Y1001A1001A63L";
    std::string start, end;
    std::string kind = "both";  // prices | load | both
    int resolution = 60;
    std::string tz = "CET";
    std::string out = "panel.csv";
    std::string cache;
    bool fill_missing = false;
};

struct PointArgs {
    std::string input;
    std::string tz = "UTC";
    std::vector<int> windows{182};
    std::vector<int> lags{1, 2, 7};
    std::vector<std::string> exogenous;
    std::string scaler = "meanstd";
    std::string vst = "arcsinh";  // or "none"
    std::string model = "lr";
    bool pooled = false;
    std::string first_day, last_day;
    std::string out = "points.csv";
};

struct BacktestArgs {
    std::string points;
    std::string actuals;
    std::string actuals_column = "price_da";
    std::vector<std::string> variants{"QRA"};
    int window = 72;
    std::vector<double> alphas{50, 70, 90};
    int grid_percentiles = 99;
    std::vector<double> grid_levels;  // overrides grid_percentiles when set
    double lambda_l1 = 1.0;
    std::string bandwidth = "rot";  // "rot" or a number
    int factors = 1;
    bool no_intercept = false;
    bool no_crossing_repair = false;
    double significance = 0.05;
    bool skip_failed = false;
    int jobs = 1;
    bool seeded_demo = false;
    int demo_days = 150;
    std::string outdir = "qra_report";
};

struct EvaluateArgs {
    std::string surface;
    std::string actuals;
    std::string actuals_column = "price_da";
    std::vector<double> alphas{50, 70, 90};
    double significance = 0.05;
    std::string outdir = ".";
};

// --- config file handling ------------------------------------------------
// Precedence: defaults < command-line flags < config file. The effective
// config is echoed next to every output.

const json& section(const json& cfg, const std::string& name) {
    static const json empty = json::object();
    if (!cfg.contains(name)) return empty;
    const json& s = cfg.at(name);
    if (!s.is_object()) throw qra::ConfigError("config: '" + name + "' must be an object");
    return s;
}

template <typename T>
void take(const json& s, const char* key, T& into) {
    if (!s.contains(key)) return;
    try {
        into = s.at(key).get<T>();
    } catch (const json::exception&) {
        throw qra::ConfigError(std::string("config: bad type for '") + key + "'");
    }
}

void check_keys(const json& s, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, value] : s.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw qra::ConfigError("config: unknown key '" + key + "' in section '" + where + "'");
    }
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw qra::ConfigError("config: cannot open '" + path + "'");
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw qra::ConfigError(std::string("config: parse failure: ") + e.what());
    }
    if (!cfg.is_object()) throw qra::ConfigError("config: top level must be an object");
    check_keys(cfg, {"fetch", "point", "backtest", "evaluate"}, "top level");
    return cfg;
}

void write_effective_config(const std::filesystem::path& path, const json& effective) {
    std::ofstream out(path);
    out << effective.dump(2) << '\n';
}

// --- fetch ----------------------------------------------------------------

qra::EntsoeRequest base_request(const FetchArgs& a) {
    qra::EntsoeRequest req;
    req.security_token = a.token;
    req.domain_code = a.domain;
    req.period_start = qra::parse_date(a.start);
    req.period_end = qra::parse_date(a.end);
    req.resolution_preference = a.resolution;
    req.market_tz = qra::parse_market_tz(a.tz);
    req.fill_missing_positions = a.fill_missing;
    return req;
}

int cmd_fetch(FetchArgs a, const json& cfg_section) {
    check_keys(cfg_section,
               {"token", "domain", "start", "end", "kind", "resolution", "tz", "out", "cache",
                "fill_missing"},
               "fetch");
    take(cfg_section, "token", a.token);
    take(cfg_section, "domain", a.domain);
    take(cfg_section, "start", a.start);
    take(cfg_section, "end", a.end);
    take(cfg_section, "kind", a.kind);
    take(cfg_section, "resolution", a.resolution);
    take(cfg_section, "tz", a.tz);
    take(cfg_section, "out", a.out);
    take(cfg_section, "cache", a.cache);
    take(cfg_section, "fill_missing", a.fill_missing);

    if (a.token.empty()) {
        if (const char* env = std::getenv("ENTSOE_TOKEN")) a.token = env;
    }
    if (a.token.empty()) {
        throw qra::AuthError(
            "no ENTSO-E security token: pass --token or set the ENTSOE_TOKEN environment "
            "variable (free token from https://transparency.entsoe.eu/)");
    }
    if (a.start.empty() || a.end.empty()) {
        throw qra::ConfigError("fetch: --start and --end are required");
    }

    std::shared_ptr<qra::HttpTransport> transport = qra::make_tls_transport();
    if (!a.cache.empty()) transport = qra::make_caching_transport(transport, a.cache);
    qra::EntsoeClient client(transport);

    const qra::EntsoeRequest req = base_request(a);
    std::optional<qra::HourlyTimeSeries> prices, load;
    if (a.kind == "prices" || a.kind == "both") prices = client.fetch_day_ahead_prices(req);
    if (a.kind == "load" || a.kind == "both") load = client.fetch_forecast_load(req);
    if (!prices && !load) throw qra::ConfigError("fetch: --kind must be prices, load or both");

    if (prices) {
        qra::save_panel_csv(a.out, qra::MarketPanel(*prices, load));
    } else {
        // Load only: store it in the price column slot of a bare CSV.
        qra::CsvSchema schema;
        schema.price_column = "quantity";
        qra::save_panel_csv(a.out, qra::MarketPanel(*load), schema);
    }
    const json effective{{"fetch",
                          {{"domain", a.domain},
                           {"start", a.start},
                           {"end", a.end},
                           {"kind", a.kind},
                           {"resolution", a.resolution},
                           {"tz", a.tz},
                           {"out", a.out},
                           {"cache", a.cache},
                           {"fill_missing", a.fill_missing}}}};
    write_effective_config(a.out + ".config.json", effective);
    std::cout << "wrote " << a.out << '\n';
    return 0;
}

// --- point ------------------------------------------------------------------

int cmd_point(PointArgs a, const json& cfg_section) {
    check_keys(cfg_section,
               {"input", "tz", "windows", "lags", "exogenous", "scaler", "vst", "model", "pooled",
                "first_day", "last_day", "out"},
               "point");
    take(cfg_section, "input", a.input);
    take(cfg_section, "tz", a.tz);
    take(cfg_section, "windows", a.windows);
    take(cfg_section, "lags", a.lags);
    take(cfg_section, "exogenous", a.exogenous);
    take(cfg_section, "scaler", a.scaler);
    take(cfg_section, "vst", a.vst);
    take(cfg_section, "model", a.model);
    take(cfg_section, "pooled", a.pooled);
    take(cfg_section, "first_day", a.first_day);
    take(cfg_section, "last_day", a.last_day);
    take(cfg_section, "out", a.out);

    if (a.input.empty()) throw qra::ConfigError("point: --input is required");
    if (a.windows.empty()) throw qra::ConfigError("point: at least one window");

    const qra::MarketPanel panel = qra::load_csv(a.input, {}, qra::parse_market_tz(a.tz));

    qra::PointModelConfig config;
    config.model = qra::parse_point_model_kind(a.model);
    config.scaler = qra::parse_scaler_kind(a.scaler);
    if (a.vst != "none" && a.vst != "") {
        config.vst = qra::VstParams::defaults(qra::parse_vst_kind(a.vst));
    }
    config.features.lags = a.lags;
    config.features.exogenous = a.exogenous;

    const int max_window = *std::max_element(a.windows.begin(), a.windows.end());
    const int max_lag = *std::max_element(a.lags.begin(), a.lags.end());
    const auto& price = panel.price_da();
    qra::CalibrationSchedule schedule;
    schedule.per_hour = !a.pooled;
    schedule.first_prediction_day =
        a.first_day.empty()
            ? qra::add_days(price.stamp(0).market_day, max_window + max_lag)
            : qra::parse_date(a.first_day);
    schedule.last_prediction_day = a.last_day.empty() ? price.stamps().back().market_day
                                                      : qra::parse_date(a.last_day);

    std::vector<qra::PointForecastMatrix> columns;
    std::printf("%-20s %8s %10s %8s %8s %8s %8s\n", "Calibration Window", "MAE", "MSE", "RMSE",
                "MAPE", "MAPE%", "R2");
    for (int window : a.windows) {
        qra::CalibrationSchedule s = schedule;
        s.window_days = window;
        qra::PointForecastMatrix m = qra::rolling_point_forecast(panel, config, s);
        const qra::HourlyTimeSeries actual =
            price.slice_days(s.first_prediction_day, s.last_prediction_day);
        const qra::HourlyTimeSeries predicted(
            m.stamps(),
            std::vector<double>(m.values().col(0).begin(), m.values().col(0).end()),
            price.units());
        qra::PointMetricsReport r = qra::point_metrics(actual, predicted);
        std::printf("%-20s %8.3f %10.3f %8.3f %8s %8s %8s\n",
                    (std::to_string(window) + " days").c_str(), r.mae, r.mse, r.rmse,
                    r.mape ? (std::to_string(*r.mape).substr(0, 6)).c_str() : "n/a",
                    r.mape ? (std::to_string(*r.mape * 100.0).substr(0, 6)).c_str() : "n/a",
                    r.r2 ? (std::to_string(*r.r2).substr(0, 6)).c_str() : "n/a");
        columns.push_back(std::move(m));
    }

    // Bind columns over the shared span.
    const qra::PointForecastMatrix& first = columns.front();
    std::vector<std::string> names;
    Eigen::MatrixXd values(first.rows(), columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].stamps() != first.stamps()) {
            throw qra::SpanMismatchError("point: window outputs span different rows");
        }
        names.push_back(columns[c].forecaster_names()[0]);
        values.col(static_cast<Eigen::Index>(c)) = columns[c].values().col(0);
    }
    qra::save_point_matrix_csv(a.out, qra::PointForecastMatrix(first.stamps(), names, values));

    json effective{{"point",
                    {{"input", a.input},
                     {"tz", a.tz},
                     {"windows", a.windows},
                     {"lags", a.lags},
                     {"exogenous", a.exogenous},
                     {"scaler", a.scaler},
                     {"vst", a.vst},
                     {"model", a.model},
                     {"pooled", a.pooled},
                     {"first_day", qra::format_date(schedule.first_prediction_day)},
                     {"last_day", qra::format_date(schedule.last_prediction_day)},
                     {"out", a.out}}}};
    write_effective_config(a.out + ".config.json", effective);
    std::cout << "wrote " << a.out << '\n';
    return 0;
}

// --- backtest ---------------------------------------------------------------

qra::VariantSpec make_variant_spec(const std::string& name, const BacktestArgs& a) {
    qra::VariantSpec spec;
    spec.kind = qra::parse_variant_kind(name);
    spec.factor_count = a.factors;
    spec.l1.lambda_l1 = a.lambda_l1;
    spec.include_intercept = !a.no_intercept;
    if (a.bandwidth != "rot" && !a.bandwidth.empty()) {
        spec.bw = qra::SmoothingBandwidth::fixed(qra::csv::parse_double(a.bandwidth));
    }
    return spec;
}

int cmd_backtest(BacktestArgs a, const json& cfg_section) {
    check_keys(cfg_section,
               {"points", "actuals", "actuals_column", "variants", "window", "alphas",
                "grid_percentiles", "grid_levels", "lambda_l1", "bandwidth", "factors",
                "no_intercept", "no_crossing_repair", "significance", "skip_failed", "jobs",
                "seeded_demo", "demo_days", "outdir"},
               "backtest");
    take(cfg_section, "points", a.points);
    take(cfg_section, "actuals", a.actuals);
    take(cfg_section, "actuals_column", a.actuals_column);
    take(cfg_section, "variants", a.variants);
    take(cfg_section, "window", a.window);
    take(cfg_section, "alphas", a.alphas);
    take(cfg_section, "grid_percentiles", a.grid_percentiles);
    take(cfg_section, "grid_levels", a.grid_levels);
    take(cfg_section, "lambda_l1", a.lambda_l1);
    take(cfg_section, "bandwidth", a.bandwidth);
    take(cfg_section, "factors", a.factors);
    take(cfg_section, "no_intercept", a.no_intercept);
    take(cfg_section, "no_crossing_repair", a.no_crossing_repair);
    take(cfg_section, "significance", a.significance);
    take(cfg_section, "skip_failed", a.skip_failed);
    take(cfg_section, "jobs", a.jobs);
    take(cfg_section, "seeded_demo", a.seeded_demo);
    take(cfg_section, "demo_days", a.demo_days);
    take(cfg_section, "outdir", a.outdir);

    std::optional<qra::PointForecastMatrix> x;
    std::optional<qra::HourlyTimeSeries> y;
    if (a.seeded_demo) {
        qra::SyntheticData data = qra::linear_gaussian_data(a.demo_days, 20150105u, 2);
        x = std::move(data.point_forecasts);
        y = std::move(data.actual);
    } else {
        if (a.points.empty() || a.actuals.empty()) {
            throw qra::ConfigError("backtest: --points and --actuals are required (or --seeded-demo)");
        }
        x = qra::load_point_matrix_csv(a.points);
        const qra::HourlyTimeSeries all = qra::load_actuals_csv(a.actuals, a.actuals_column);
        // Align actuals onto the point-forecast span.
        std::vector<double> vals;
        vals.reserve(x->rows());
        for (const qra::Timestamp& ts : x->stamps()) {
            const std::size_t i = all.index_of(ts.epoch_seconds);
            if (i == qra::HourlyTimeSeries::npos) {
                throw qra::AlignmentError("backtest: actuals lack " + qra::format_timestamp(ts));
            }
            vals.push_back(all.value(i));
        }
        y = qra::HourlyTimeSeries(x->stamps(), std::move(vals), all.units());
    }

    std::vector<std::string> names = a.variants;
    if (names.size() == 1 && (names[0] == "ALL" || names[0] == "all")) {
        names.clear();
        for (qra::VariantKind k : qra::all_variant_kinds()) names.push_back(qra::to_string(k));
    }

    std::vector<qra::BacktestConfig> cfgs;
    for (const std::string& name : names) {
        qra::BacktestConfig cfg;
        cfg.calibration_window_days = a.window;
        cfg.variant = make_variant_spec(name, a);
        cfg.grid = a.grid_levels.empty() ? qra::QuantileGrid::percentiles()
                                         : qra::QuantileGrid(a.grid_levels);
        if (a.grid_levels.empty() && a.grid_percentiles != 99) {
            std::vector<double> levels;
            for (int i = 1; i <= a.grid_percentiles; ++i) {
                levels.push_back(static_cast<double>(i) / (a.grid_percentiles + 1));
            }
            cfg.grid = qra::QuantileGrid(levels);
        }
        cfg.alphas = a.alphas;
        cfg.crossing_repair = !a.no_crossing_repair;
        cfg.test_significance = a.significance;
        cfg.skip_failed_days = a.skip_failed;
        cfg.jobs = a.jobs;
        cfgs.push_back(std::move(cfg));
    }

    const std::vector<qra::BacktestReport> reports = qra::compare_variants(*x, *y, cfgs);
    qra::write_report_bundle(a.outdir, reports);

    std::printf("%-8s %6s %8s %10s %8s %10s %8s\n", "variant", "alpha", "AEC", "kupiec", "rej",
                "christof", "rej");
    for (const qra::BacktestReport& r : reports) {
        for (const qra::AlphaEvaluation& e : r.per_alpha) {
            std::printf("%-8s %6.1f %8.2f %10.4f %8s %10.4f %8s\n", r.variant_name.c_str(), e.alpha,
                        e.coverage.aec, e.kupiec.statistic, e.kupiec.reject ? "yes" : "no",
                        e.christoffersen.statistic, e.christoffersen.reject ? "yes" : "no");
        }
        std::printf("%-8s %6s %8s APS %.6f\n", r.variant_name.c_str(), "", "", r.aps_value);
    }

    json effective{{"backtest",
                    {{"points", a.points},
                     {"actuals", a.actuals},
                     {"variants", names},
                     {"window", a.window},
                     {"alphas", a.alphas},
                     {"lambda_l1", a.lambda_l1},
                     {"bandwidth", a.bandwidth},
                     {"factors", a.factors},
                     {"no_intercept", a.no_intercept},
                     {"crossing_repair", !a.no_crossing_repair},
                     {"significance", a.significance},
                     {"skip_failed", a.skip_failed},
                     {"seeded_demo", a.seeded_demo},
                     {"demo_days", a.demo_days},
                     {"outdir", a.outdir}}}};
    write_effective_config(std::filesystem::path(a.outdir) / "effective_config.json", effective);
    return 0;
}

// --- evaluate ----------------------------------------------------------------

int cmd_evaluate(EvaluateArgs a, const json& cfg_section) {
    check_keys(cfg_section, {"surface", "actuals", "actuals_column", "alphas", "significance", "outdir"},
               "evaluate");
    take(cfg_section, "surface", a.surface);
    take(cfg_section, "actuals", a.actuals);
    take(cfg_section, "actuals_column", a.actuals_column);
    take(cfg_section, "alphas", a.alphas);
    take(cfg_section, "significance", a.significance);
    take(cfg_section, "outdir", a.outdir);
    if (a.surface.empty() || a.actuals.empty()) {
        throw qra::ConfigError("evaluate: --surface and --actuals are required");
    }

    const qra::QuantileForecastSurface surface = qra::load_surface_csv(a.surface);
    const qra::HourlyTimeSeries all = qra::load_actuals_csv(a.actuals, a.actuals_column);
    std::vector<double> vals;
    for (const qra::Timestamp& ts : surface.stamps()) {
        const std::size_t i = all.index_of(ts.epoch_seconds);
        if (i == qra::HourlyTimeSeries::npos) {
            throw qra::AlignmentError("evaluate: actuals lack " + qra::format_timestamp(ts));
        }
        vals.push_back(all.value(i));
    }
    const qra::HourlyTimeSeries actual(surface.stamps(), std::move(vals), all.units());

    std::filesystem::create_directories(a.outdir);
    std::ofstream metrics(std::filesystem::path(a.outdir) / "metrics.csv");
    metrics << "variant,alpha,aec,kupiec_statistic,kupiec_reject,christoffersen_statistic,"
               "christoffersen_reject\n";
    std::printf("%6s %8s %10s %8s %10s %8s\n", "alpha", "AEC", "kupiec", "rej", "christof", "rej");
    for (double alpha : a.alphas) {
        const qra::CoverageResult cov = qra::aec(qra::build_interval(surface, alpha), actual);
        const qra::LrTestResult k = qra::kupiec_test(cov.hits, alpha, a.significance);
        const qra::LrTestResult c = qra::christoffersen_test(cov.hits, alpha, a.significance);
        metrics << "surface," << qra::csv::format_double(alpha) << ','
                << qra::csv::format_double(cov.aec) << ',' << qra::csv::format_double(k.statistic)
                << ',' << (k.reject ? 1 : 0) << ',' << qra::csv::format_double(c.statistic) << ','
                << (c.reject ? 1 : 0) << '\n';
        std::printf("%6.1f %8.2f %10.4f %8s %10.4f %8s\n", alpha, cov.aec, k.statistic,
                    k.reject ? "yes" : "no", c.statistic, c.reject ? "yes" : "no");
    }
    const double score = qra::aps(surface, actual);
    std::ofstream aps_file(std::filesystem::path(a.outdir) / "aps.csv");
    aps_file << "variant,aps\nsurface," << qra::csv::format_double(score) << '\n';
    std::printf("APS %.6f\n", score);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantile Regression Averaging toolkit for probabilistic electricity price "
                 "forecasting"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (overrides flags)");

    FetchArgs fetch;
    CLI::App* cmd_f = app.add_subcommand("fetch", "Download market data from ENTSO-E");
    cmd_f->add_option("--token", fetch.token, "security token (or env ENTSOE_TOKEN)");
    cmd_f->add_option("--domain", fetch.domain, "EIC area code");
    cmd_f->add_option("--start", fetch.start, "first market day (YYYY-MM-DD)");
    cmd_f->add_option("--end", fetch.end, "end market day, exclusive");
    cmd_f->add_option("--kind", fetch.kind, "prices | load | both");
    cmd_f->add_option("--resolution", fetch.resolution, "preferred resolution in minutes");
    cmd_f->add_option("--tz", fetch.tz, "market time zone (UTC, CET)");
    cmd_f->add_option("--out", fetch.out, "output CSV");
    cmd_f->add_option("--cache", fetch.cache, "on-disk response cache directory");
    cmd_f->add_flag("--fill-missing", fetch.fill_missing, "interpolate missing XML positions");

    PointArgs point;
    CLI::App* cmd_p = app.add_subcommand("point", "Rolling-window point forecasts + metrics");
    cmd_p->add_option("--input", point.input, "panel CSV (datetime, price_da[, quantity])");
    cmd_p->add_option("--tz", point.tz, "label zone of the CSV");
    cmd_p->add_option("--windows", point.windows, "calibration windows in days")->delimiter(',');
    cmd_p->add_option("--lags", point.lags, "day lags")->delimiter(',');
    cmd_p->add_option("--exog", point.exogenous, "exogenous columns")->delimiter(',');
    cmd_p->add_option("--scaler", point.scaler, "meanstd | medianmad");
    cmd_p->add_option("--vst", point.vst, "3sigma|3sigmalog|logistic|arcsinh|boxcox|poly|mlog|pit|none");
    cmd_p->add_option("--model", point.model, "lr | naive");
    cmd_p->add_flag("--pooled", point.pooled, "one pooled model instead of per-hour models");
    cmd_p->add_option("--first-day", point.first_day, "first prediction day");
    cmd_p->add_option("--last-day", point.last_day, "last prediction day");
    cmd_p->add_option("--out", point.out, "output point-forecast CSV");

    BacktestArgs bt;
    CLI::App* cmd_b = app.add_subcommand("backtest", "Rolling QRA backtest over variants");
    cmd_b->add_option("--points", bt.points, "point-forecast CSV");
    cmd_b->add_option("--actuals", bt.actuals, "actual-price CSV");
    cmd_b->add_option("--actuals-column", bt.actuals_column, "column with actual prices");
    cmd_b->add_option("--variant", bt.variants, "variant names or ALL")->delimiter(',');
    cmd_b->add_option("--window", bt.window, "calibration window in days");
    cmd_b->add_option("--alphas", bt.alphas, "coverage levels in percent")->delimiter(',');
    cmd_b->add_option("--grid-levels", bt.grid_levels, "explicit quantile levels")->delimiter(',');
    cmd_b->add_option("--lambda", bt.lambda_l1, "L1 penalty for LQRA");
    cmd_b->add_option("--bandwidth", bt.bandwidth, "smoothing bandwidth ('rot' or a number)");
    cmd_b->add_option("--factors", bt.factors, "PCA factor count for F-variants");
    cmd_b->add_flag("--no-intercept", bt.no_intercept, "fit without intercepts");
    cmd_b->add_flag("--no-crossing-repair", bt.no_crossing_repair, "skip monotone rearrangement");
    cmd_b->add_option("--significance", bt.significance, "test significance level");
    cmd_b->add_flag("--skip-failed", bt.skip_failed, "skip days whose fit fails");
    cmd_b->add_option("--jobs", bt.jobs, "max parallel day fits");
    cmd_b->add_flag("--seeded-demo", bt.seeded_demo, "run on the bundled synthetic dataset");
    cmd_b->add_option("--demo-days", bt.demo_days, "days of synthetic data");
    cmd_b->add_option("--outdir", bt.outdir, "report bundle directory");

    EvaluateArgs ev;
    CLI::App* cmd_e = app.add_subcommand("evaluate", "Metrics from an existing surface CSV");
    cmd_e->add_option("--surface", ev.surface, "surface CSV (datetime, q01..q99)");
    cmd_e->add_option("--actuals", ev.actuals, "actual-price CSV");
    cmd_e->add_option("--actuals-column", ev.actuals_column, "column with actual prices");
    cmd_e->add_option("--alphas", ev.alphas, "coverage levels in percent")->delimiter(',');
    cmd_e->add_option("--significance", ev.significance, "test significance level");
    cmd_e->add_option("--outdir", ev.outdir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = json::object();
        if (!config_path.empty()) cfg = load_config(config_path);
        if (cmd_f->parsed()) return cmd_fetch(fetch, section(cfg, "fetch"));
        if (cmd_p->parsed()) return cmd_point(point, section(cfg, "point"));
        if (cmd_b->parsed()) return cmd_backtest(bt, section(cfg, "backtest"));
        if (cmd_e->parsed()) return cmd_evaluate(ev, section(cfg, "evaluate"));
    } catch (const qra::AuthError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAuth;
    } catch (const qra::RateLimitedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNetwork;
    } catch (const qra::NetworkError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNetwork;
    } catch (const qra::NotConvergedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const qra::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const qra::MalformedDocumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const qra::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const qra::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
