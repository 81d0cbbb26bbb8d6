#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qra/core.hpp"

namespace qra {

enum class ScalerKind { MeanStd, MedianMad };

ScalerKind parse_scaler_kind(const std::string& name);
std::string to_string(ScalerKind kind);

/// Fitted location/spread scaler: apply(x) = (x - center) / spread.
/// MeanStd uses mean and sample standard deviation; MedianMad uses the median
/// and the mean absolute deviation around the median.
struct ScalerState {
    ScalerKind kind = ScalerKind::MeanStd;
    double center = 0.0;
    double spread = 1.0;  // > 0
};

ScalerState fit_scaler(std::span<const double> data, ScalerKind kind);
double apply_scaler(const ScalerState& state, double x);
double invert_scaler(const ScalerState& state, double y);
std::vector<double> apply_scaler(const ScalerState& state, std::span<const double> xs);
std::vector<double> invert_scaler(const ScalerState& state, std::span<const double> ys);

enum class VstKind { ThreeSigma, ThreeSigmaLog, Logistic, Arcsinh, BoxCox, Poly, Mlog, Pit };

VstKind parse_vst_kind(const std::string& name);
std::string to_string(VstKind kind);

/// Poly and Mlog exist in two shapes: the corrected, literature-consistent
/// Standard form (monotone and analytically invertible everywhere, the
/// default) and the TablePrinted compatibility form, which is undefined or
/// non-injective for small |p| when c < 1.
enum class FormulaVariant { Standard, TablePrinted };

enum class PitReference { Normal, Uniform };

struct VstParams {
    VstKind kind = VstKind::Arcsinh;
    double lambda = 0.0;  // BoxCox, Poly
    double c = 0.0;       // Poly, Mlog
    FormulaVariant formula = FormulaVariant::Standard;
    PitReference pit_reference = PitReference::Normal;

    /// Per-kind defaults: BoxCox lambda 0.5; Poly lambda 0.125, c 0.33;
    /// Mlog c 0.33.
    static VstParams defaults(VstKind kind);
};

/// Empirical CDF estimate for the probability integral transform: unique
/// ascending sample values with plotting positions i/(n+1), endpoints clamped
/// to [1/(n+1), n/(n+1)], linear interpolation in between.
struct PitState {
    std::vector<double> xs;
    std::vector<double> qs;
};

/// A fitted variance stabilizing transformation. Input is expected in scaled
/// units (the p of the P -> p -> Y flow). Stateless for every kind but Pit.
class Vst {
  public:
    static Vst fit(const VstParams& params, std::span<const double> scaled_training);
    /// Stateless construction; throws ParamError for Pit (needs a fit).
    static Vst stateless(const VstParams& params);
    /// Rebuild from serialized state.
    static Vst restore(const VstParams& params, std::optional<PitState> pit);

    double transform(double p) const;
    double inverse(double y) const;
    std::vector<double> transform(std::span<const double> ps) const;
    std::vector<double> inverse(std::span<const double> ys) const;

    const VstParams& params() const { return params_; }
    const std::optional<PitState>& pit_state() const { return pit_; }

    Vst() = default;

  private:
    VstParams params_{};
    std::optional<PitState> pit_;
};

/// Fitted states of the P -> scaling -> p -> VST -> Y composition; kept so
/// predictions can be inverted back to original units exactly.
struct VstPipelineState {
    ScalerState scaler;
    Vst vst;
};

std::pair<HourlyTimeSeries, VstPipelineState> vst_pipeline(const HourlyTimeSeries& raw,
                                                           ScalerKind scaler_kind,
                                                           const VstParams& vst_params);
HourlyTimeSeries vst_pipeline_invert(const VstPipelineState& state,
                                     const HourlyTimeSeries& transformed);

// Serialization (full-precision round trip).
void to_json(nlohmann::json& j, const ScalerState& s);
void from_json(const nlohmann::json& j, ScalerState& s);
void to_json(nlohmann::json& j, const Vst& v);
void from_json(const nlohmann::json& j, Vst& v);
void to_json(nlohmann::json& j, const VstPipelineState& s);
void from_json(const nlohmann::json& j, VstPipelineState& s);

}  // namespace qra
