// Copyright 2026 The lensreview Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lensreview/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>

namespace lensreview {

namespace {

class HttplibClient final : public HttpClient {
public:
    HttplibClient(const std::string& base_url, std::chrono::seconds timeout) {
        // "https://host:port/prefix" -> scheme_host_port + prefix
        auto scheme_end = base_url.find("://");
        auto path_start = base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        std::string origin = path_start == std::string::npos ? base_url : base_url.substr(0, path_start);
        prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
        client_ = std::make_unique<httplib::Client>(origin);
        client_->set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count());
        client_->set_read_timeout(timeout.count());
        client_->set_write_timeout(timeout.count());
        client_->set_follow_location(true);
    }

    HttpResponse get(const std::string& path, const HttpHeaders& headers) override {
        return convert(client_->Get(prefix_ + path, to_headers(headers)));
    }

    HttpResponse post(const std::string& path, const std::string& body, const std::string& content_type,
                      const HttpHeaders& headers) override {
        return convert(client_->Post(prefix_ + path, to_headers(headers), body, content_type));
    }

private:
    static httplib::Headers to_headers(const HttpHeaders& in) {
        httplib::Headers h;
        for (const auto& [k, v] : in) h.emplace(k, v);
        return h;
    }

    static HttpResponse convert(const httplib::Result& res) {
        if (!res) {
            auto err = res.error();
            bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                             err == httplib::Error::ConnectionTimeout;
            throw TransportError("http transport error: " + httplib::to_string(err), timed_out);
        }
        HttpResponse out;
        out.status = res->status;
        out.body = res->body;
        for (const auto& [k, v] : res->headers) {
            std::string key = k;
            std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
            out.headers[key] = v;
        }
        return out;
    }

    std::unique_ptr<httplib::Client> client_;
    std::string prefix_;
};

}  // namespace

std::unique_ptr<HttpClient> make_http_client(const std::string& base_url, std::chrono::seconds timeout) {
    return std::make_unique<HttplibClient>(base_url, timeout);
}

}  // namespace lensreview
