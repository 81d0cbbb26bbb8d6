#include "qra/entsoe.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace qra {

namespace {

std::int64_t parse_utc_instant(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    const int got = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%dZ", &y, &mo, &d, &h, &mi, &sec);
    if (got < 5 || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23) {
        throw MalformedDocumentError("bad timeInterval instant: '" + s + "'");
    }
    return days_from_civil(CivilDate{y, mo, d}) * 86400 + h * 3600 + mi * 60 + sec;
}

int parse_resolution_minutes(const std::string& s) {
    if (s == "PT1H") return 60;
    if (s == "P1D") return 1440;
    int mins = 0;
    if (std::sscanf(s.c_str(), "PT%dM", &mins) == 1 && mins > 0) return mins;
    throw MalformedDocumentError("unsupported resolution: '" + s + "'");
}

struct PeriodData {
    int res_minutes = 60;
    std::int64_t start_utc = 0;
    std::vector<std::optional<double>> values;  // index = position - 1
};

std::string value_key(DocumentKind kind) {
    return kind == DocumentKind::DayAheadPrices ? "price.amount" : "quantity";
}

}  // namespace

std::vector<UtcPoint> parse_market_document(const std::string& xml, DocumentKind kind,
                                            int resolution_preference_minutes,
                                            bool fill_missing_positions) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream ss(xml);
        pt::read_xml(ss, tree);
    } catch (const pt::xml_parser_error& e) {
        throw MalformedDocumentError(std::string("XML parse failure: ") + e.what());
    }
    if (tree.empty()) throw MalformedDocumentError("empty document");

    const auto& root_pair = tree.front();
    if (root_pair.first.find("Acknowledgement") != std::string::npos) {
        const std::string reason =
            root_pair.second.get<std::string>("Reason.text", "no matching data");
        throw MalformedDocumentError("platform acknowledgement: " + reason);
    }
    const pt::ptree& root = root_pair.second;

    const std::string key = value_key(kind);
    std::vector<PeriodData> periods;
    for (const auto& [ts_name, ts_node] : root) {
        if (ts_name != "TimeSeries") continue;
        for (const auto& [p_name, p_node] : ts_node) {
            if (p_name != "Period") continue;
            PeriodData period;
            const auto interval = p_node.get_child_optional("timeInterval");
            if (!interval) throw MalformedDocumentError("Period without timeInterval");
            period.start_utc = parse_utc_instant(interval->get<std::string>("start", ""));
            const std::int64_t end_utc = parse_utc_instant(interval->get<std::string>("end", ""));
            period.res_minutes = parse_resolution_minutes(p_node.get<std::string>("resolution", ""));
            const std::int64_t span = end_utc - period.start_utc;
            if (span <= 0 || span % (period.res_minutes * 60) != 0) {
                throw MalformedDocumentError("Period interval not a multiple of its resolution");
            }
            period.values.resize(static_cast<std::size_t>(span / (period.res_minutes * 60)));

            bool any_point = false;
            for (const auto& [pt_name, pt_node] : p_node) {
                if (pt_name != "Point") continue;
                any_point = true;
                const auto pos = pt_node.get_optional<int>("position");
                const auto val = pt_node.get_optional<double>(key);
                if (!pos || !val) {
                    throw MalformedDocumentError("Point missing position or " + key);
                }
                if (*pos < 1 || static_cast<std::size_t>(*pos) > period.values.size()) {
                    throw MalformedDocumentError("Point position out of range: " +
                                                 std::to_string(*pos));
                }
                period.values[static_cast<std::size_t>(*pos - 1)] = *val;
            }
            if (!any_point) throw MalformedDocumentError("Period without Point elements");
            periods.push_back(std::move(period));
        }
    }
    if (periods.empty()) throw MalformedDocumentError("document has no TimeSeries/Period data");

    // Resolution preference, else the finest available.
    bool has_preferred = false;
    int finest = 1441;
    for (const PeriodData& p : periods) {
        has_preferred = has_preferred || p.res_minutes == resolution_preference_minutes;
        finest = std::min(finest, p.res_minutes);
    }
    const int selected = has_preferred ? resolution_preference_minutes : finest;
    if (selected > 60) {
        throw MalformedDocumentError("no series at hourly or finer resolution");
    }

    // First block in document order wins on overlap.
    std::map<std::int64_t, double> by_instant;
    for (PeriodData& p : periods) {
        if (p.res_minutes != selected) continue;
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            if (!p.values[i]) {
                if (!fill_missing_positions) {
                    throw MalformedDocumentError("missing Point position " + std::to_string(i + 1));
                }
                // Interpolate between the nearest present neighbours.
                std::size_t lo = i;
                while (lo > 0 && !p.values[lo - 1]) --lo;
                std::size_t hi = i;
                while (hi + 1 < p.values.size() && !p.values[hi + 1]) ++hi;
                const std::optional<double> left = lo > 0 ? p.values[lo - 1] : std::nullopt;
                const std::optional<double> right =
                    hi + 1 < p.values.size() ? p.values[hi + 1] : std::nullopt;
                if (!left && !right) throw MalformedDocumentError("Period entirely empty");
                double fill;
                if (left && right) {
                    const double t = static_cast<double>(i - lo + 1) /
                                     static_cast<double>(hi - lo + 2);
                    fill = *left + t * (*right - *left);
                } else {
                    fill = left ? *left : *right;
                }
                p.values[i] = fill;
            }
            by_instant.emplace(p.start_utc + static_cast<std::int64_t>(i) * selected * 60,
                               *p.values[i]);
        }
    }

    std::vector<UtcPoint> out;
    if (selected == 60) {
        out.reserve(by_instant.size());
        for (const auto& [t, v] : by_instant) out.push_back({t, v});
        return out;
    }
    // Aggregate sub-hourly observations to hourly means.
    std::int64_t hour = 0;
    double sum = 0.0;
    int count = 0;
    for (const auto& [t, v] : by_instant) {
        const std::int64_t h = t - (t % 3600);
        if (count > 0 && h != hour) {
            out.push_back({hour, sum / count});
            sum = 0.0;
            count = 0;
        }
        hour = h;
        sum += v;
        ++count;
    }
    if (count > 0) out.push_back({hour, sum / count});
    return out;
}

std::string build_query(const EntsoeRequest& req) {
    const auto fmt = [](std::int64_t utc) {
        const std::int64_t days = utc >= 0 ? utc / 86400 : (utc - 86399) / 86400;
        const CivilDate d = civil_from_days(days);
        const int secs = static_cast<int>(utc - days * 86400);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%04d%02d%02d%02d%02d", d.year, d.month, d.day, secs / 3600,
                      (secs % 3600) / 60);
        return std::string(buf);
    };
    std::string q = "/api?securityToken=" + req.security_token;
    if (req.document_kind == DocumentKind::DayAheadPrices) {
        q += "&documentType=A44&in_Domain=" + req.domain_code + "&out_Domain=" + req.domain_code;
    } else {
        q += "&documentType=A65&processType=A01&outBiddingZone_Domain=" + req.domain_code;
    }
    q += "&periodStart=" + fmt(utc_from_local_midnight(req.period_start, req.market_tz));
    q += "&periodEnd=" + fmt(utc_from_local_midnight(req.period_end, req.market_tz));
    return q;
}

EntsoeClient::EntsoeClient(std::shared_ptr<HttpTransport> transport, RetryPolicy retry)
    : transport_(std::move(transport)), retry_(retry) {
    if (!transport_) throw ValidationError("EntsoeClient: null transport");
}

HourlyTimeSeries EntsoeClient::fetch(const EntsoeRequest& req, const std::string& units) {
    if (req.security_token.empty()) throw AuthError("ENTSO-E security token is required");
    if (req.domain_code.empty()) throw ValidationError("domain_code must be non-empty");
    if (!(req.period_start < req.period_end)) {
        throw BadIntervalError("period_start must precede period_end");
    }

    // Calendar-year chunks (the provider caps one query at a year of data).
    std::vector<std::pair<CivilDate, CivilDate>> chunks;
    CivilDate cursor = req.period_start;
    while (cursor < req.period_end) {
        const CivilDate year_end{cursor.year + 1, 1, 1};
        const CivilDate stop = std::min(year_end, req.period_end);
        chunks.emplace_back(cursor, stop);
        cursor = stop;
    }

    std::map<std::int64_t, double> merged;
    for (const auto& [lo, hi] : chunks) {
        EntsoeRequest chunk = req;
        chunk.period_start = lo;
        chunk.period_end = hi;
        const std::string target = build_query(chunk);

        HttpResponse resp;
        int attempt = 0;
        for (;;) {
            resp = transport_->get(target);
            if (resp.status == 200) break;
            if (resp.status == 401 || resp.status == 403) {
                throw AuthError("ENTSO-E rejected the security token (HTTP " +
                                std::to_string(resp.status) + ")");
            }
            if (resp.status == 400) {
                throw BadIntervalError("ENTSO-E rejected the request (HTTP 400)");
            }
            const bool retryable = resp.status == 429 || resp.status >= 500;
            if (!retryable || attempt >= retry_.max_retries) {
                if (resp.status == 429) throw RateLimitedError("ENTSO-E rate limit (HTTP 429)");
                throw NetworkError("ENTSO-E request failed (HTTP " + std::to_string(resp.status) +
                                   ")");
            }
            std::this_thread::sleep_for(retry_.initial_backoff * (1 << attempt));
            ++attempt;
        }

        for (const UtcPoint& p :
             parse_market_document(resp.body, req.document_kind, req.resolution_preference,
                                   req.fill_missing_positions)) {
            merged.emplace(p.utc_seconds, p.value);
        }
    }
    if (merged.empty()) throw MalformedDocumentError("no data points in response");

    std::vector<RawHourlyPoint> raw;
    raw.reserve(merged.size());
    for (const auto& [utc, value] : merged) {
        const LocalLabel label = local_label_from_utc(utc, req.market_tz);
        raw.push_back({label.day, label.hour, value});
    }
    HourlyTimeSeries series = normalize_dst(std::move(raw), req.market_tz, units);

    const CivilDate last_day = add_days(req.period_end, -1);
    if (series.index_of(Timestamp::from_labels(req.period_start, 0).epoch_seconds) ==
            HourlyTimeSeries::npos ||
        series.index_of(Timestamp::from_labels(last_day, 23).epoch_seconds) ==
            HourlyTimeSeries::npos) {
        throw GapError("response does not cover [" + format_date(req.period_start) + ", " +
                       format_date(req.period_end) + ")");
    }
    return series.slice_days(req.period_start, last_day);
}

HourlyTimeSeries EntsoeClient::fetch_day_ahead_prices(EntsoeRequest req) {
    req.document_kind = DocumentKind::DayAheadPrices;
    return fetch(req, "EUR/MWh");
}

HourlyTimeSeries EntsoeClient::fetch_forecast_load(EntsoeRequest req) {
    req.document_kind = DocumentKind::ForecastLoad;
    return fetch(req, "MWh");
}

}  // namespace qra
