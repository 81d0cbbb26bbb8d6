#include <filesystem>
#include <fstream>
#include <sstream>

#include "qra/digest.hpp"
#include "qra/entsoe.hpp"

#ifdef QRA_HAS_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#endif

namespace qra {

namespace {

#ifdef QRA_HAS_OPENSSL
class TlsTransport final : public HttpTransport {
  public:
    explicit TlsTransport(std::string host) : host_(std::move(host)) {}

    HttpResponse get(const std::string& target) override {
        httplib::SSLClient client(host_);
        client.set_read_timeout(60, 0);
        client.set_connection_timeout(30, 0);
        auto res = client.Get(target.c_str());
        if (!res) {
            throw NetworkError("connection to " + host_ + " failed: " +
                               httplib::to_string(res.error()));
        }
        return {res->status, res->body};
    }

  private:
    std::string host_;
};
#endif

// Strips the security token so cache keys do not depend on credentials.
std::string cache_key(const std::string& target) {
    std::string redacted = target;
    const std::string param = "securityToken=";
    const std::size_t pos = redacted.find(param);
    if (pos != std::string::npos) {
        std::size_t end = redacted.find('&', pos);
        if (end == std::string::npos) end = redacted.size();
        redacted.erase(pos, end - pos);
    }
    return fnv1a64_hex(redacted);
}

class CachingTransport final : public HttpTransport {
  public:
    CachingTransport(std::shared_ptr<HttpTransport> inner, std::string dir)
        : inner_(std::move(inner)), dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    HttpResponse get(const std::string& target) override {
        const std::filesystem::path file = std::filesystem::path(dir_) / (cache_key(target) + ".xml");
        if (std::filesystem::exists(file)) {
            std::ifstream in(file, std::ios::binary);
            std::ostringstream body;
            body << in.rdbuf();
            return {200, body.str()};
        }
        HttpResponse resp = inner_->get(target);
        if (resp.status == 200) {
            // Atomic publish: write to a temp path, then rename.
            const std::filesystem::path tmp = file.string() + ".tmp";
            {
                std::ofstream out(tmp, std::ios::binary);
                out << resp.body;
            }
            std::filesystem::rename(tmp, file);
        }
        return resp;
    }

  private:
    std::shared_ptr<HttpTransport> inner_;
    std::string dir_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_tls_transport(const std::string& host) {
#ifdef QRA_HAS_OPENSSL
    return std::make_shared<TlsTransport>(host);
#else
    (void)host;
    throw NetworkError("built without TLS support; live ENTSO-E access is unavailable");
#endif
}

std::shared_ptr<HttpTransport> make_caching_transport(std::shared_ptr<HttpTransport> inner,
                                                      const std::string& cache_dir) {
    return std::make_shared<CachingTransport>(std::move(inner), cache_dir);
}

}  // namespace qra
