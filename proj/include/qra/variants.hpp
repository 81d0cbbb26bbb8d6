#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "qra/core.hpp"
#include "qra/qrsolve.hpp"

namespace qra {

/// The nine quantile-regression-averaging variants: compositions of row
/// averaging, row standardization and PCA factor extraction with the plain,
/// L1-penalized and smoothed solver kernels.
enum class VariantKind { QRA, QRM, LQRA, FQRA, FQRM, SFQRA, SFQRM, SQRA, SQRM };

VariantKind parse_variant_kind(const std::string& name);
std::string to_string(VariantKind kind);
std::vector<VariantKind> all_variant_kinds();

struct VariantSpec {
    VariantKind kind = VariantKind::QRA;
    int factor_count = 1;                       // F-variants
    L1Penalty l1{1.0, false, true};             // LQRA
    SmoothingBandwidth bw{};                    // S-variants (rule-of-thumb default)
    bool include_intercept = true;
    /// Row standardization convention: divide by m (population, default) or
    /// m-1 (sample).
    bool row_std_population = true;
};

struct PcaState {
    Eigen::VectorXd col_means;
    Eigen::MatrixXd loadings;  // columns orthonormal, sign-fixed
};

/// Frozen preprocessing: what was learned from the training window and gets
/// re-applied at prediction time.
struct PreprocessState {
    bool row_standardize = false;
    bool population_row_std = true;
    bool average_inputs = false;       // QRM / SQRM
    std::optional<PcaState> pca;       // F-variants
    bool average_scores = false;       // FQRM / sFQRM
};

struct FittedVariant {
    VariantSpec spec;
    PreprocessState pre;
    QuantileGrid grid{std::vector<double>{0.5}};
    std::vector<QrCoefficients> per_level;  // aligned with grid
    std::vector<std::string> forecaster_names;
};

/// Row-wise standardization of the forecaster dimension: each row scaled to
/// mean 0, std 1 across the m columns. Throws DegenerateRowError on zero std.
Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& x, bool population);

/// Fit the preprocessing for `spec` on training data and return the design.
Eigen::MatrixXd preprocess_fit(const VariantSpec& spec, const Eigen::MatrixXd& x,
                               PreprocessState& state);
/// Re-apply frozen preprocessing to new data.
Eigen::MatrixXd preprocess_apply(const PreprocessState& state, const Eigen::MatrixXd& x);

FittedVariant fit_variant(const VariantSpec& spec, const Eigen::MatrixXd& x_train,
                          const Eigen::VectorXd& y_train, const QuantileGrid& grid);
FittedVariant fit_variant(const VariantSpec& spec, const PointForecastMatrix& x_train,
                          const HourlyTimeSeries& y_train, const QuantileGrid& grid);

Eigen::MatrixXd predict_variant_matrix(const FittedVariant& fv, const Eigen::MatrixXd& x_new);
QuantileForecastSurface predict_variant(const FittedVariant& fv, const PointForecastMatrix& x_new,
                                        bool crossing_repair = true);

void to_json(nlohmann::json& j, const FittedVariant& fv);
void from_json(const nlohmann::json& j, FittedVariant& fv);

}  // namespace qra
