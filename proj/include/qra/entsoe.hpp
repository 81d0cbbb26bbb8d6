#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qra/core.hpp"
#include "qra/ingest.hpp"

namespace qra {

enum class DocumentKind { DayAheadPrices, ForecastLoad };

/// One request against the transparency platform. Spans longer than a year
/// are split into calendar-year chunks internally (provider limit).
struct EntsoeRequest {
    std::string security_token;
    std::string domain_code;        // EIC area code, e.g. 10Y1001A1001A63L
    CivilDate period_start;         // market-local days, [start, end)
    CivilDate period_end;
    DocumentKind document_kind = DocumentKind::DayAheadPrices;
    int resolution_preference = 60;  // minutes
    MarketTz market_tz = MarketTz::CentralEurope;
    /// Lenient mode: interpolate missing Point positions inside a Period
    /// instead of raising MalformedDocument.
    bool fill_missing_positions = false;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal GET transport so the client can run against canned fixtures.
class HttpTransport {
  public:
    virtual ~HttpTransport() = default;
    /// `target` is the path plus query string, e.g. "/api?documentType=A44...".
    virtual HttpResponse get(const std::string& target) = 0;
};

/// Live HTTPS transport to web-api.tp.entsoe.eu. Throws NetworkError when the
/// build lacks TLS support or the connection fails.
std::shared_ptr<HttpTransport> make_tls_transport(const std::string& host = "web-api.tp.entsoe.eu");

/// Read-through on-disk cache (atomic file writes; token excluded from keys).
std::shared_ptr<HttpTransport> make_caching_transport(std::shared_ptr<HttpTransport> inner,
                                                      const std::string& cache_dir);

struct RetryPolicy {
    int max_retries = 3;  // on 429/5xx; never retries 401
    std::chrono::milliseconds initial_backoff{500};
};

/// A true-UTC observation parsed from a market document.
struct UtcPoint {
    std::int64_t utc_seconds = 0;
    double value = 0.0;
};

/// Parse a Publication_MarketDocument / GL_MarketDocument. Periods matching
/// the preferred resolution win; otherwise the finest available resolution is
/// aggregated to hourly means. Overlapping TimeSeries blocks resolve
/// first-in-document-order. Throws MalformedDocumentError on missing
/// Period/Point structure.
std::vector<UtcPoint> parse_market_document(const std::string& xml, DocumentKind kind,
                                            int resolution_preference_minutes,
                                            bool fill_missing_positions);

/// Query string for a request ("/api?..."), deterministic parameter order.
std::string build_query(const EntsoeRequest& req);

class EntsoeClient {
  public:
    explicit EntsoeClient(std::shared_ptr<HttpTransport> transport, RetryPolicy retry = {});

    HourlyTimeSeries fetch_day_ahead_prices(EntsoeRequest req);
    HourlyTimeSeries fetch_forecast_load(EntsoeRequest req);

  private:
    HourlyTimeSeries fetch(const EntsoeRequest& req, const std::string& units);

    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy retry_;
};

}  // namespace qra
