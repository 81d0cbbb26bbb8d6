#include "qra/backtest.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "qra/csvio.hpp"
#include "qra/digest.hpp"

namespace qra {

namespace {

void check_inputs(const PointForecastMatrix& x, const HourlyTimeSeries& y) {
    if (x.rows() != y.size()) throw AlignmentError("backtest: X rows != y length");
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (x.stamps()[i] != y.stamp(i)) {
            throw AlignmentError("backtest: X and y misaligned at row " + std::to_string(i));
        }
    }
    detail::require_hourly_grid(x.stamps(), "backtest inputs");
    if (x.rows() % 24 != 0 || x.stamps().front().market_hour != 0) {
        throw ValidationError("backtest: inputs must cover whole market days");
    }
}

std::string annotate_day(const CivilDate& day, const char* what) {
    return "day " + format_date(day) + ": " + what;
}

}  // namespace

BacktestReport run_backtest(const PointForecastMatrix& x, const HourlyTimeSeries& y,
                            const BacktestConfig& cfg) {
    check_inputs(x, y);
    if (cfg.calibration_window_days < 2) {
        throw ValidationError("backtest: calibration window must be >= 2 days");
    }
    for (double a : cfg.alphas) {
        if (!(a > 0.0 && a < 100.0)) throw ValidationError("backtest: alphas must lie in (0,100)");
    }
    const std::size_t n_days = x.rows() / 24;
    const std::size_t window = static_cast<std::size_t>(cfg.calibration_window_days);
    if (n_days < window + 1) {
        throw CoverageError("backtest: needs at least window + 1 days of data (" +
                            std::to_string(n_days) + " days given, window " +
                            std::to_string(window) + ")");
    }
    const std::size_t n_pred = n_days - window;
    const Eigen::Index levels = static_cast<Eigen::Index>(cfg.grid.size());

    const Eigen::Map<const Eigen::VectorXd> y_all(y.values().data(),
                                                  static_cast<Eigen::Index>(y.size()));

    Eigen::MatrixXd predicted(n_pred * 24, levels);
    std::vector<std::exception_ptr> failures(n_pred);

    auto run_day = [&](std::size_t p) {
        const std::size_t day = window + p;
        try {
            const Eigen::Index train_lo = static_cast<Eigen::Index>((day - window) * 24);
            const Eigen::Index train_n = static_cast<Eigen::Index>(window * 24);
            const FittedVariant fv =
                fit_variant(cfg.variant, x.values().middleRows(train_lo, train_n),
                            y_all.segment(train_lo, train_n), cfg.grid);
            predicted.middleRows(static_cast<Eigen::Index>(p * 24), 24) =
                predict_variant_matrix(fv, x.values().middleRows(static_cast<Eigen::Index>(day * 24), 24));
        } catch (...) {
            failures[p] = std::current_exception();
        }
    };

    if (cfg.jobs > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const unsigned n_threads =
            std::min<unsigned>(static_cast<unsigned>(cfg.jobs), std::thread::hardware_concurrency());
        for (unsigned t = 0; t < std::max(1u, n_threads); ++t) {
            pool.emplace_back([&] {
                for (std::size_t p = next.fetch_add(1); p < n_pred; p = next.fetch_add(1)) {
                    run_day(p);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    } else {
        for (std::size_t p = 0; p < n_pred; ++p) run_day(p);
    }

    // Fold results in day order regardless of completion order.
    std::vector<CivilDate> skipped;
    std::vector<std::size_t> kept;
    for (std::size_t p = 0; p < n_pred; ++p) {
        if (!failures[p]) {
            kept.push_back(p);
            continue;
        }
        const CivilDate day = x.stamps()[(window + p) * 24].market_day;
        if (!cfg.skip_failed_days) {
            try {
                std::rethrow_exception(failures[p]);
            } catch (const NotConvergedError& e) {
                throw NotConvergedError(annotate_day(day, e.what()));
            } catch (const RankDeficientError& e) {
                throw RankDeficientError(annotate_day(day, e.what()));
            } catch (const Error& e) {
                throw Error(annotate_day(day, e.what()));
            }
        }
        skipped.push_back(day);
    }
    if (kept.empty()) throw CoverageError("backtest: every prediction day failed");

    std::vector<Timestamp> stamps;
    std::vector<double> actual_values;
    Eigen::MatrixXd values(kept.size() * 24, levels);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const std::size_t p = kept[i];
        values.middleRows(static_cast<Eigen::Index>(i * 24), 24) =
            predicted.middleRows(static_cast<Eigen::Index>(p * 24), 24);
        for (int h = 0; h < 24; ++h) {
            stamps.push_back(x.stamps()[(window + p) * 24 + static_cast<std::size_t>(h)]);
            actual_values.push_back(y.value((window + p) * 24 + static_cast<std::size_t>(h)));
        }
    }

    QuantileForecastSurface surface(std::move(stamps), cfg.grid, std::move(values));
    if (cfg.crossing_repair) surface = repair_crossing(surface);
    const HourlyTimeSeries actual(surface.stamps(), std::move(actual_values), y.units());

    BacktestReport report{to_string(cfg.variant.kind), cfg,           {}, 0.0, std::move(surface),
                          "",                          "",            std::move(skipped)};
    for (double alpha : cfg.alphas) {
        AlphaEvaluation eval;
        eval.alpha = alpha;
        eval.coverage = aec(build_interval(report.surface, alpha), actual);
        eval.kupiec = kupiec_test(eval.coverage.hits, alpha, cfg.test_significance);
        eval.christoffersen =
            christoffersen_test(eval.coverage.hits, alpha, cfg.test_significance);
        report.per_alpha.push_back(std::move(eval));
    }
    report.aps_value = aps(report.surface, actual);

    std::ostringstream input_bytes;
    save_point_matrix_csv(input_bytes, x);
    input_bytes << '\n';
    for (std::size_t i = 0; i < y.size(); ++i) {
        input_bytes << csv::format_double(y.value(i)) << '\n';
    }
    report.input_digest = fnv1a64_hex(input_bytes.str());
    report.config_digest = fnv1a64_hex(config_to_json(cfg).dump());
    return report;
}

std::vector<BacktestReport> compare_variants(const PointForecastMatrix& x,
                                             const HourlyTimeSeries& y,
                                             const std::vector<BacktestConfig>& cfgs) {
    if (cfgs.empty()) throw ValidationError("compare_variants: no configs");
    for (const BacktestConfig& cfg : cfgs) {
        if (cfg.calibration_window_days != cfgs.front().calibration_window_days) {
            throw SpanMismatchError(
                "compare_variants: calibration windows differ, prediction spans would not match");
        }
    }
    std::vector<BacktestReport> reports;
    reports.reserve(cfgs.size());
    for (const BacktestConfig& cfg : cfgs) reports.push_back(run_backtest(x, y, cfg));
    return reports;
}

nlohmann::json config_to_json(const BacktestConfig& cfg) {
    nlohmann::json j{
        {"calibration_window_days", cfg.calibration_window_days},
        {"variant", to_string(cfg.variant.kind)},
        {"factor_count", cfg.variant.factor_count},
        {"lambda_l1", cfg.variant.l1.lambda_l1},
        {"include_intercept", cfg.variant.include_intercept},
        {"row_std_population", cfg.variant.row_std_population},
        {"grid", cfg.grid.levels()},
        {"alphas", cfg.alphas},
        {"crossing_repair", cfg.crossing_repair},
        {"test_significance", cfg.test_significance},
        {"skip_failed_days", cfg.skip_failed_days},
    };
    if (cfg.variant.bw.rule == BandwidthRule::Fixed) {
        j["bandwidth"] = cfg.variant.bw.h;
    } else {
        j["bandwidth"] = "rule-of-thumb";
    }
    return j;
}

void write_report_bundle(const std::string& dir, const std::vector<BacktestReport>& reports) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);

    {
        std::ofstream out(base / "metrics.csv");
        out << "variant,alpha,aec,kupiec_statistic,kupiec_reject,christoffersen_statistic,"
               "christoffersen_reject\n";
        for (const BacktestReport& r : reports) {
            for (const AlphaEvaluation& a : r.per_alpha) {
                out << r.variant_name << ',' << csv::format_double(a.alpha) << ','
                    << csv::format_double(a.coverage.aec) << ','
                    << csv::format_double(a.kupiec.statistic) << ',' << (a.kupiec.reject ? 1 : 0)
                    << ',' << csv::format_double(a.christoffersen.statistic) << ','
                    << (a.christoffersen.reject ? 1 : 0) << '\n';
            }
        }
    }
    {
        std::ofstream out(base / "aps.csv");
        out << "variant,aps\n";
        for (const BacktestReport& r : reports) {
            out << r.variant_name << ',' << csv::format_double(r.aps_value) << '\n';
        }
    }
    for (const BacktestReport& r : reports) {
        save_surface_csv((base / ("surface_" + r.variant_name + ".csv")).string(), r.surface);
    }
    nlohmann::json provenance = nlohmann::json::array();
    for (const BacktestReport& r : reports) {
        nlohmann::json entry = config_to_json(r.config);
        entry["input_digest"] = r.input_digest;
        entry["config_digest"] = r.config_digest;
        std::vector<std::string> skipped;
        for (const CivilDate& d : r.skipped_days) skipped.push_back(format_date(d));
        entry["skipped_days"] = skipped;
        provenance.push_back(std::move(entry));
    }
    std::ofstream out(base / "provenance.json");
    out << provenance.dump(2) << '\n';
}

}  // namespace qra
