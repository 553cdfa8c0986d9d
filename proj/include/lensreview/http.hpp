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

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lensreview/error.hpp"

namespace lensreview {

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;  // keys lowercased

    std::string header(const std::string& lowercase_name) const {
        auto it = headers.find(lowercase_name);
        return it == headers.end() ? std::string() : it->second;
    }
};

/// Connection failed or timed out before any HTTP status was received.
class TransportError : public Error {
public:
    TransportError(const std::string& what, bool timed_out) : Error(what), timed_out_(timed_out) {}
    bool timed_out() const noexcept { return timed_out_; }

private:
    bool timed_out_;
};

/// Minimal blocking HTTP client bound to one base URL. Paths are appended to
/// the base URL's path prefix.
class HttpClient {
public:
    virtual ~HttpClient() = default;
    virtual HttpResponse get(const std::string& path, const HttpHeaders& headers) = 0;
    virtual HttpResponse post(const std::string& path, const std::string& body, const std::string& content_type,
                              const HttpHeaders& headers) = 0;
};

std::unique_ptr<HttpClient> make_http_client(const std::string& base_url,
                                             std::chrono::seconds timeout = std::chrono::seconds(120));

}  // namespace lensreview
