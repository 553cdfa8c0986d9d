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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lensreview {

/// Base for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedDiff : public Error {
public:
    MalformedDiff(const std::string& what, std::size_t byte_offset, std::string file)
        : Error("malformed diff at byte " + std::to_string(byte_offset) +
                (file.empty() ? "" : " (" + file + ")") + ": " + what),
          byte_offset_(byte_offset), file_(std::move(file)) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }
    const std::string& file() const noexcept { return file_; }

private:
    std::size_t byte_offset_;
    std::string file_;
};

// pr-ingest
class NotFound : public Error { public: using Error::Error; };
class AuthFailure : public Error { public: using Error::Error; };
class FixtureSchemaMismatch : public Error { public: using Error::Error; };

class RateLimited : public Error {
public:
    RateLimited(const std::string& what, int retry_after_seconds)
        : Error(what), retry_after_(retry_after_seconds) {}
    int retry_after_seconds() const noexcept { return retry_after_; }

private:
    int retry_after_;
};

// lens-registry / prompt-forge
class UnknownRole : public Error { public: using Error::Error; };
class InvalidDefinition : public Error {
public:
    InvalidDefinition(const std::string& what, std::vector<std::string> violations)
        : Error(what), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};
class NonExecutableLens : public Error { public: using Error::Error; };
class TemplateIntegrityError : public Error { public: using Error::Error; };

// model-gateway
class ProviderError : public Error { public: using Error::Error; };
class Timeout : public Error { public: using Error::Error; };
class UnknownRun : public Error { public: using Error::Error; };

// finding-pipeline
class UnparseableOutput : public Error {
public:
    explicit UnparseableOutput(std::string raw)
        : Error("model output has no recognizable finding structure"), raw_(std::move(raw)) {}
    const std::string& raw_text() const noexcept { return raw_; }

private:
    std::string raw_;
};

// match-engine / metric-suite / report-cli
class DanglingOverride : public Error { public: using Error::Error; };
class ZeroDenominator : public Error { public: using Error::Error; };

class MissingRuns : public Error {
public:
    explicit MissingRuns(std::vector<std::string> gaps)
        : Error(describe(gaps)), gaps_(std::move(gaps)) {}
    const std::vector<std::string>& gaps() const noexcept { return gaps_; }

private:
    static std::string describe(const std::vector<std::string>& gaps) {
        std::string s = "missing runs:";
        for (const auto& g : gaps) s += " " + g;
        return s;
    }
    std::vector<std::string> gaps_;
};

class ConfigError : public Error { public: using Error::Error; };

}  // namespace lensreview
