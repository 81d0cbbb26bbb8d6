#include "qra/transform.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "qra/stats.hpp"

namespace qra {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ScalerKind parse_scaler_kind(const std::string& name) {
    if (name == "meanstd" || name == "MeanStd") return ScalerKind::MeanStd;
    if (name == "medianmad" || name == "MedianMad") return ScalerKind::MedianMad;
    throw ParseError("unknown scaler kind: '" + name + "'");
}

std::string to_string(ScalerKind kind) {
    return kind == ScalerKind::MeanStd ? "meanstd" : "medianmad";
}

ScalerState fit_scaler(std::span<const double> data, ScalerKind kind) {
    if (data.size() < 2) throw ScaleError("fit_scaler: needs at least 2 values");
    detail::require_finite(std::vector<double>(data.begin(), data.end()), "fit_scaler");
    ScalerState state;
    state.kind = kind;
    const double n = static_cast<double>(data.size());
    if (kind == ScalerKind::MeanStd) {
        double mean = 0.0;
        for (double x : data) mean += x;
        mean /= n;
        double ss = 0.0;
        for (double x : data) ss += (x - mean) * (x - mean);
        state.center = mean;
        state.spread = std::sqrt(ss / (n - 1.0));
    } else {
        std::vector<double> v(data.begin(), data.end());
        const double med = median_of(v);
        double mad = 0.0;
        for (double x : data) mad += std::abs(x - med);
        state.center = med;
        state.spread = mad / n;
    }
    if (!(state.spread > 0.0)) throw ScaleError("fit_scaler: constant input (zero spread)");
    return state;
}

double apply_scaler(const ScalerState& state, double x) { return (x - state.center) / state.spread; }
double invert_scaler(const ScalerState& state, double y) { return y * state.spread + state.center; }

std::vector<double> apply_scaler(const ScalerState& state, std::span<const double> xs) {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = apply_scaler(state, xs[i]);
    return out;
}

std::vector<double> invert_scaler(const ScalerState& state, std::span<const double> ys) {
    std::vector<double> out(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) out[i] = invert_scaler(state, ys[i]);
    return out;
}

VstKind parse_vst_kind(const std::string& name) {
    if (name == "3sigma" || name == "threesigma") return VstKind::ThreeSigma;
    if (name == "3sigmalog" || name == "threesigmalog") return VstKind::ThreeSigmaLog;
    if (name == "logistic") return VstKind::Logistic;
    if (name == "arcsinh" || name == "asinh") return VstKind::Arcsinh;
    if (name == "boxcox") return VstKind::BoxCox;
    if (name == "poly") return VstKind::Poly;
    if (name == "mlog") return VstKind::Mlog;
    if (name == "pit") return VstKind::Pit;
    throw ParseError("unknown VST kind: '" + name + "'");
}

std::string to_string(VstKind kind) {
    switch (kind) {
        case VstKind::ThreeSigma: return "3sigma";
        case VstKind::ThreeSigmaLog: return "3sigmalog";
        case VstKind::Logistic: return "logistic";
        case VstKind::Arcsinh: return "arcsinh";
        case VstKind::BoxCox: return "boxcox";
        case VstKind::Poly: return "poly";
        case VstKind::Mlog: return "mlog";
        case VstKind::Pit: return "pit";
    }
    return "?";
}

VstParams VstParams::defaults(VstKind kind) {
    VstParams p;
    p.kind = kind;
    switch (kind) {
        case VstKind::BoxCox: p.lambda = 0.5; break;
        case VstKind::Poly: p.lambda = 0.125; p.c = 0.33; break;
        case VstKind::Mlog: p.c = 0.33; break;
        default: break;
    }
    return p;
}

namespace {

void validate_params(const VstParams& p) {
    switch (p.kind) {
        case VstKind::BoxCox:
            if (!(p.lambda >= 0.0)) throw ParamError("BoxCox: lambda must be >= 0");
            break;
        case VstKind::Poly:
            if (!(p.lambda > 0.0) || p.lambda == 1.0) {
                throw ParamError("Poly: lambda must be positive and != 1");
            }
            if (!(p.c > 0.0)) throw ParamError("Poly: c must be > 0");
            break;
        case VstKind::Mlog:
            if (!(p.c > 0.0)) throw ParamError("Mlog: c must be > 0");
            break;
        default:
            break;
    }
}

double pit_reference_ppf(PitReference ref, double q) {
    return ref == PitReference::Normal ? stats::norm_ppf(q) : q;
}

double pit_reference_cdf(PitReference ref, double y) {
    if (ref == PitReference::Normal) return stats::norm_cdf(y);
    return std::clamp(y, 0.0, 1.0);
}

// Piecewise-linear interpolation of ys over ascending xs, clamped outside.
double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

}  // namespace

Vst Vst::stateless(const VstParams& params) {
    validate_params(params);
    if (params.kind == VstKind::Pit) throw ParamError("Pit needs a fitted CDF estimate; use Vst::fit");
    Vst v;
    v.params_ = params;
    return v;
}

Vst Vst::restore(const VstParams& params, std::optional<PitState> pit) {
    validate_params(params);
    if (params.kind == VstKind::Pit && (!pit || pit->xs.size() < 2 || pit->xs.size() != pit->qs.size())) {
        throw ParamError("Pit restore: missing or malformed CDF estimate");
    }
    Vst v;
    v.params_ = params;
    if (params.kind == VstKind::Pit) v.pit_ = std::move(pit);
    return v;
}

Vst Vst::fit(const VstParams& params, std::span<const double> scaled_training) {
    validate_params(params);
    Vst v;
    v.params_ = params;
    if (params.kind != VstKind::Pit) return v;

    if (scaled_training.size() < 2) throw ValidationError("Pit fit: needs at least 2 values");
    std::vector<double> sorted(scaled_training.begin(), scaled_training.end());
    detail::require_finite(sorted, "Pit fit");
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    // Plotting positions i/(n+1); ties collapse to one knot with the mean
    // position so the estimate stays strictly increasing and invertible.
    PitState state;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        double qsum = 0.0;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            qsum += (static_cast<double>(j) + 1.0) / (n + 1.0);
            ++j;
        }
        state.xs.push_back(sorted[i]);
        state.qs.push_back(qsum / static_cast<double>(j - i));
        i = j;
    }
    if (state.xs.size() < 2) throw ValidationError("Pit fit: needs at least 2 distinct values");
    v.pit_ = std::move(state);
    return v;
}

double Vst::transform(double p) const {
    const VstParams& prm = params_;
    switch (prm.kind) {
        case VstKind::ThreeSigma:
            return std::abs(p) > 3.0 ? 3.0 * sgn(p) : p;
        case VstKind::ThreeSigmaLog:
            return std::abs(p) > 3.0 ? sgn(p) * (std::log(std::abs(p) - 2.0) + 3.0) : p;
        case VstKind::Logistic:
            return 1.0 / (1.0 + std::exp(-p));
        case VstKind::Arcsinh:
            return std::asinh(p);
        case VstKind::BoxCox:
            if (prm.lambda > 0.0) {
                return sgn(p) * (std::pow(std::abs(p) + 1.0, prm.lambda) - 1.0) / prm.lambda;
            }
            return sgn(p) * std::log(std::abs(p) + 1.0);
        case VstKind::Poly: {
            if (prm.formula == FormulaVariant::Standard) {
                const double a = std::pow(prm.c, 1.0 / (prm.lambda - 1.0));
                const double b = std::pow(prm.c, prm.lambda / (prm.lambda - 1.0));
                return sgn(p) * (std::pow(std::abs(p) + a, prm.lambda) - b);
            }
            const double bracket =
                std::pow(std::abs(p) / prm.c + 1.0, prm.lambda) - std::pow(1.0 / prm.c, prm.lambda);
            if (bracket < 0.0) {
                throw DomainError("Poly (TablePrinted): negative bracket for |p| < 1 - c");
            }
            return sgn(p) * std::pow(bracket, 1.0 / (prm.lambda - 1.0));
        }
        case VstKind::Mlog:
            if (prm.formula == FormulaVariant::Standard) {
                return sgn(p) * (std::log(std::abs(p) + 1.0 / prm.c) + std::log(prm.c));
            }
            return sgn(p) * (std::log(std::abs(p) / prm.c + 1.0) + std::log(prm.c));
        case VstKind::Pit: {
            if (!pit_) throw ParamError("Pit transform requires a fitted CDF estimate");
            const double q = interp(pit_->xs, pit_->qs, p);
            return pit_reference_ppf(prm.pit_reference, q);
        }
    }
    throw ParamError("unknown VST kind");
}

double Vst::inverse(double y) const {
    const VstParams& prm = params_;
    switch (prm.kind) {
        case VstKind::ThreeSigma:
            // Clipping destroys information; the inverse is the identity on
            // the non-clipped range and cannot recover |p| > 3.
            return y;
        case VstKind::ThreeSigmaLog:
            return std::abs(y) > 3.0 ? sgn(y) * (std::exp(std::abs(y) - 3.0) + 2.0) : y;
        case VstKind::Logistic:
            if (!(y > 0.0 && y < 1.0)) throw DomainError("Logistic inverse requires y in (0, 1)");
            return std::log(y / (1.0 - y));
        case VstKind::Arcsinh:
            return std::sinh(y);
        case VstKind::BoxCox:
            if (prm.lambda > 0.0) {
                return sgn(y) * (std::pow(prm.lambda * std::abs(y) + 1.0, 1.0 / prm.lambda) - 1.0);
            }
            return sgn(y) * (std::exp(std::abs(y)) - 1.0);
        case VstKind::Poly: {
            if (prm.formula == FormulaVariant::Standard) {
                const double a = std::pow(prm.c, 1.0 / (prm.lambda - 1.0));
                const double b = std::pow(prm.c, prm.lambda / (prm.lambda - 1.0));
                return sgn(y) * (std::pow(std::abs(y) + b, 1.0 / prm.lambda) - a);
            }
            if (y == 0.0) return 0.0;
            const double bracket = std::pow(std::abs(y), prm.lambda - 1.0);
            const double base = bracket + std::pow(1.0 / prm.c, prm.lambda);
            return sgn(y) * prm.c * (std::pow(base, 1.0 / prm.lambda) - 1.0);
        }
        case VstKind::Mlog:
            if (prm.formula == FormulaVariant::Standard) {
                return sgn(y) * (std::exp(std::abs(y)) - 1.0) / prm.c;
            }
            // The printed form is not injective near zero; clamp at 0.
            return sgn(y) * std::max(0.0, std::exp(std::abs(y)) - prm.c);
        case VstKind::Pit: {
            if (!pit_) throw ParamError("Pit inverse requires a fitted CDF estimate");
            double q = pit_reference_cdf(prm.pit_reference, y);
            q = std::clamp(q, pit_->qs.front(), pit_->qs.back());
            return interp(pit_->qs, pit_->xs, q);
        }
    }
    throw ParamError("unknown VST kind");
}

std::vector<double> Vst::transform(std::span<const double> ps) const {
    std::vector<double> out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) out[i] = transform(ps[i]);
    return out;
}

std::vector<double> Vst::inverse(std::span<const double> ys) const {
    std::vector<double> out(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) out[i] = inverse(ys[i]);
    return out;
}

std::pair<HourlyTimeSeries, VstPipelineState> vst_pipeline(const HourlyTimeSeries& raw,
                                                           ScalerKind scaler_kind,
                                                           const VstParams& vst_params) {
    VstPipelineState state;
    state.scaler = fit_scaler(raw.values(), scaler_kind);
    const std::vector<double> scaled = apply_scaler(state.scaler, raw.values());
    state.vst = Vst::fit(vst_params, scaled);
    return {raw.with_values(state.vst.transform(scaled)), std::move(state)};
}

HourlyTimeSeries vst_pipeline_invert(const VstPipelineState& state,
                                     const HourlyTimeSeries& transformed) {
    const std::vector<double> scaled = state.vst.inverse(transformed.values());
    return transformed.with_values(invert_scaler(state.scaler, scaled));
}

void to_json(nlohmann::json& j, const ScalerState& s) {
    j = nlohmann::json{{"kind", to_string(s.kind)}, {"center", s.center}, {"spread", s.spread}};
}

void from_json(const nlohmann::json& j, ScalerState& s) {
    s.kind = parse_scaler_kind(j.at("kind").get<std::string>());
    s.center = j.at("center").get<double>();
    s.spread = j.at("spread").get<double>();
}

void to_json(nlohmann::json& j, const Vst& v) {
    const VstParams& p = v.params();
    j = nlohmann::json{{"kind", to_string(p.kind)},
                       {"lambda", p.lambda},
                       {"c", p.c},
                       {"formula", p.formula == FormulaVariant::Standard ? "standard" : "table"},
                       {"pit_reference", p.pit_reference == PitReference::Normal ? "normal" : "uniform"}};
    if (v.pit_state()) {
        j["pit"] = nlohmann::json{{"xs", v.pit_state()->xs}, {"qs", v.pit_state()->qs}};
    }
}

void from_json(const nlohmann::json& j, Vst& v) {
    VstParams p;
    p.kind = parse_vst_kind(j.at("kind").get<std::string>());
    p.lambda = j.at("lambda").get<double>();
    p.c = j.at("c").get<double>();
    p.formula = j.at("formula").get<std::string>() == "table" ? FormulaVariant::TablePrinted
                                                              : FormulaVariant::Standard;
    p.pit_reference = j.at("pit_reference").get<std::string>() == "uniform" ? PitReference::Uniform
                                                                            : PitReference::Normal;
    std::optional<PitState> pit;
    if (j.contains("pit")) {
        PitState st;
        st.xs = j.at("pit").at("xs").get<std::vector<double>>();
        st.qs = j.at("pit").at("qs").get<std::vector<double>>();
        pit = std::move(st);
    }
    v = Vst::restore(p, std::move(pit));
}

void to_json(nlohmann::json& j, const VstPipelineState& s) {
    j = nlohmann::json{{"scaler", s.scaler}, {"vst", s.vst}};
}

void from_json(const nlohmann::json& j, VstPipelineState& s) {
    s.scaler = j.at("scaler").get<ScalerState>();
    s.vst = j.at("vst").get<Vst>();
}

}  // namespace qra
