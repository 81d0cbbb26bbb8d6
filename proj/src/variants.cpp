#include "qra/variants.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

namespace qra {

VariantKind parse_variant_kind(const std::string& name) {
    if (name == "QRA" || name == "qra") return VariantKind::QRA;
    if (name == "QRM" || name == "qrm") return VariantKind::QRM;
    if (name == "LQRA" || name == "lqra") return VariantKind::LQRA;
    if (name == "FQRA" || name == "fqra") return VariantKind::FQRA;
    if (name == "FQRM" || name == "fqrm") return VariantKind::FQRM;
    if (name == "sFQRA" || name == "sfqra" || name == "SFQRA") return VariantKind::SFQRA;
    if (name == "sFQRM" || name == "sfqrm" || name == "SFQRM") return VariantKind::SFQRM;
    if (name == "SQRA" || name == "sqra") return VariantKind::SQRA;
    if (name == "SQRM" || name == "sqrm") return VariantKind::SQRM;
    throw ParseError("unknown variant: '" + name + "'");
}

std::string to_string(VariantKind kind) {
    switch (kind) {
        case VariantKind::QRA: return "QRA";
        case VariantKind::QRM: return "QRM";
        case VariantKind::LQRA: return "LQRA";
        case VariantKind::FQRA: return "FQRA";
        case VariantKind::FQRM: return "FQRM";
        case VariantKind::SFQRA: return "sFQRA";
        case VariantKind::SFQRM: return "sFQRM";
        case VariantKind::SQRA: return "SQRA";
        case VariantKind::SQRM: return "SQRM";
    }
    return "?";
}

std::vector<VariantKind> all_variant_kinds() {
    return {VariantKind::QRA,   VariantKind::QRM,   VariantKind::LQRA,
            VariantKind::FQRA,  VariantKind::FQRM,  VariantKind::SFQRA,
            VariantKind::SFQRM, VariantKind::SQRA,  VariantKind::SQRM};
}

namespace {

bool uses_row_standardize(VariantKind k) {
    return k == VariantKind::SFQRA || k == VariantKind::SFQRM;
}

bool uses_pca(VariantKind k) {
    return k == VariantKind::FQRA || k == VariantKind::FQRM || k == VariantKind::SFQRA ||
           k == VariantKind::SFQRM;
}

bool averages_inputs(VariantKind k) { return k == VariantKind::QRM || k == VariantKind::SQRM; }

bool averages_scores(VariantKind k) { return k == VariantKind::FQRM || k == VariantKind::SFQRM; }

Eigen::MatrixXd row_means(const Eigen::MatrixXd& x) {
    return x.rowwise().mean();
}

PcaState fit_pca(const Eigen::MatrixXd& x, int factor_count) {
    PcaState state;
    state.col_means = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - state.col_means.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    const double tol = sv.size() > 0 ? sv[0] * 1e-12 * std::max(x.rows(), x.cols()) : 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > tol) ++rank;
    }
    if (factor_count > rank) {
        throw RankError("PCA: factor_count " + std::to_string(factor_count) +
                        " exceeds the rank " + std::to_string(rank) + " of the demeaned matrix");
    }
    state.loadings = svd.matrixV().leftCols(factor_count);
    // Deterministic sign: make the largest-magnitude loading entry positive.
    for (Eigen::Index j = 0; j < state.loadings.cols(); ++j) {
        Eigen::Index imax = 0;
        state.loadings.col(j).cwiseAbs().maxCoeff(&imax);
        if (state.loadings(imax, j) < 0.0) state.loadings.col(j) = -state.loadings.col(j);
    }
    return state;
}

}  // namespace

Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& x, bool population) {
    if (x.cols() < 2) {
        throw ValidationError("row standardization needs at least 2 forecaster columns");
    }
    const double denom = population ? static_cast<double>(x.cols())
                                    : static_cast<double>(x.cols() - 1);
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double mean = x.row(i).mean();
        const double sd = std::sqrt((x.row(i).array() - mean).square().sum() / denom);
        if (!(sd > 0.0)) {
            throw DegenerateRowError("row standardization: zero std in row " + std::to_string(i));
        }
        out.row(i) = (x.row(i).array() - mean) / sd;
    }
    return out;
}

Eigen::MatrixXd preprocess_fit(const VariantSpec& spec, const Eigen::MatrixXd& x,
                               PreprocessState& state) {
    state = PreprocessState{};
    state.row_standardize = uses_row_standardize(spec.kind);
    state.population_row_std = spec.row_std_population;
    state.average_inputs = averages_inputs(spec.kind);
    state.average_scores = averages_scores(spec.kind);

    Eigen::MatrixXd z = state.row_standardize ? standardize_rows(x, spec.row_std_population) : x;
    if (state.average_inputs) z = row_means(z);
    if (uses_pca(spec.kind)) {
        if (spec.factor_count < 1 || spec.factor_count > x.cols()) {
            throw ValidationError("factor_count must lie in [1, number of forecasters]");
        }
        state.pca = fit_pca(z, spec.factor_count);
        z = (z.rowwise() - state.pca->col_means.transpose()) * state.pca->loadings;
    }
    if (state.average_scores) z = row_means(z);
    return z;
}

Eigen::MatrixXd preprocess_apply(const PreprocessState& state, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z = state.row_standardize ? standardize_rows(x, state.population_row_std) : x;
    if (state.average_inputs) z = row_means(z);
    if (state.pca) {
        if (x.cols() != state.pca->col_means.size() && !state.average_inputs) {
            throw DimensionMismatchError("preprocess_apply: column count changed since fit");
        }
        z = (z.rowwise() - state.pca->col_means.transpose()) * state.pca->loadings;
    }
    if (state.average_scores) z = row_means(z);
    return z;
}

FittedVariant fit_variant(const VariantSpec& spec, const Eigen::MatrixXd& x_train,
                          const Eigen::VectorXd& y_train, const QuantileGrid& grid) {
    if (x_train.rows() != y_train.size()) {
        throw AlignmentError("fit_variant: X rows != y length");
    }
    FittedVariant fv;
    fv.spec = spec;
    fv.grid = grid;
    const Eigen::MatrixXd z = preprocess_fit(spec, x_train, fv.pre);

    fv.per_level.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double k = grid.level(i);
        QrProblem problem{z, y_train, k, spec.include_intercept};
        try {
            switch (spec.kind) {
                case VariantKind::LQRA:
                    fv.per_level.push_back(solve_qr_l1(problem, spec.l1));
                    break;
                case VariantKind::SQRA:
                case VariantKind::SQRM:
                    fv.per_level.push_back(solve_qr_smoothed(problem, spec.bw));
                    break;
                default:
                    fv.per_level.push_back(solve_qr(problem));
                    break;
            }
        } catch (const NotConvergedError& e) {
            throw NotConvergedError("quantile " + std::to_string(k) + ": " + e.what());
        } catch (const RankDeficientError& e) {
            throw RankDeficientError("quantile " + std::to_string(k) + ": " + e.what());
        }
    }
    return fv;
}

FittedVariant fit_variant(const VariantSpec& spec, const PointForecastMatrix& x_train,
                          const HourlyTimeSeries& y_train, const QuantileGrid& grid) {
    if (x_train.rows() != y_train.size()) {
        throw AlignmentError("fit_variant: point matrix and actuals differ in length");
    }
    for (std::size_t i = 0; i < x_train.rows(); ++i) {
        if (x_train.stamps()[i] != y_train.stamp(i)) {
            throw AlignmentError("fit_variant: point matrix and actuals are misaligned at row " +
                                 std::to_string(i));
        }
    }
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
        y_train.values().data(), static_cast<Eigen::Index>(y_train.size()));
    FittedVariant fv = fit_variant(spec, x_train.values(), y, grid);
    fv.forecaster_names = x_train.forecaster_names();
    return fv;
}

Eigen::MatrixXd predict_variant_matrix(const FittedVariant& fv, const Eigen::MatrixXd& x_new) {
    const Eigen::MatrixXd z = preprocess_apply(fv.pre, x_new);
    Eigen::MatrixXd out(z.rows(), static_cast<Eigen::Index>(fv.per_level.size()));
    for (std::size_t j = 0; j < fv.per_level.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = predict_quantile(fv.per_level[j], z);
    }
    return out;
}

QuantileForecastSurface predict_variant(const FittedVariant& fv, const PointForecastMatrix& x_new,
                                        bool crossing_repair) {
    if (!fv.forecaster_names.empty() && x_new.forecaster_names() != fv.forecaster_names) {
        throw DimensionMismatchError("predict_variant: forecaster columns differ from training");
    }
    QuantileForecastSurface surface(x_new.stamps(), fv.grid,
                                    predict_variant_matrix(fv, x_new.values()));
    return crossing_repair ? repair_crossing(surface) : surface;
}

void to_json(nlohmann::json& j, const FittedVariant& fv) {
    j = nlohmann::json{
        {"variant", to_string(fv.spec.kind)},
        {"factor_count", fv.spec.factor_count},
        {"lambda_l1", fv.spec.l1.lambda_l1},
        {"include_intercept", fv.spec.include_intercept},
        {"row_std_population", fv.spec.row_std_population},
        {"grid", fv.grid.levels()},
        {"coefficients", fv.per_level},
        {"forecasters", fv.forecaster_names},
    };
    j["preprocess"] = nlohmann::json{{"row_standardize", fv.pre.row_standardize},
                                     {"population_row_std", fv.pre.population_row_std},
                                     {"average_inputs", fv.pre.average_inputs},
                                     {"average_scores", fv.pre.average_scores}};
    if (fv.pre.pca) {
        std::vector<std::vector<double>> loadings;
        for (Eigen::Index c = 0; c < fv.pre.pca->loadings.cols(); ++c) {
            loadings.emplace_back(fv.pre.pca->loadings.col(c).begin(),
                                  fv.pre.pca->loadings.col(c).end());
        }
        j["preprocess"]["pca"] = nlohmann::json{
            {"col_means",
             std::vector<double>(fv.pre.pca->col_means.begin(), fv.pre.pca->col_means.end())},
            {"loadings", loadings}};
    }
    if (fv.spec.bw.rule == BandwidthRule::Fixed) j["bandwidth"] = fv.spec.bw.h;
}

void from_json(const nlohmann::json& j, FittedVariant& fv) {
    fv.spec.kind = parse_variant_kind(j.at("variant").get<std::string>());
    fv.spec.factor_count = j.at("factor_count").get<int>();
    fv.spec.l1.lambda_l1 = j.at("lambda_l1").get<double>();
    fv.spec.include_intercept = j.at("include_intercept").get<bool>();
    fv.spec.row_std_population = j.at("row_std_population").get<bool>();
    if (j.contains("bandwidth")) fv.spec.bw = SmoothingBandwidth::fixed(j.at("bandwidth").get<double>());
    fv.grid = QuantileGrid(j.at("grid").get<std::vector<double>>());
    fv.per_level = j.at("coefficients").get<std::vector<QrCoefficients>>();
    fv.forecaster_names = j.at("forecasters").get<std::vector<std::string>>();
    const auto& pre = j.at("preprocess");
    fv.pre.row_standardize = pre.at("row_standardize").get<bool>();
    fv.pre.population_row_std = pre.at("population_row_std").get<bool>();
    fv.pre.average_inputs = pre.at("average_inputs").get<bool>();
    fv.pre.average_scores = pre.at("average_scores").get<bool>();
    if (pre.contains("pca")) {
        PcaState pca;
        const auto means = pre.at("pca").at("col_means").get<std::vector<double>>();
        pca.col_means = Eigen::Map<const Eigen::VectorXd>(means.data(),
                                                          static_cast<Eigen::Index>(means.size()));
        const auto loadings = pre.at("pca").at("loadings").get<std::vector<std::vector<double>>>();
        if (!loadings.empty()) {
            pca.loadings.resize(static_cast<Eigen::Index>(loadings[0].size()),
                                static_cast<Eigen::Index>(loadings.size()));
            for (std::size_t c = 0; c < loadings.size(); ++c) {
                pca.loadings.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(
                    loadings[c].data(), static_cast<Eigen::Index>(loadings[c].size()));
            }
        }
        fv.pre.pca = std::move(pca);
    }
}

}  // namespace qra
