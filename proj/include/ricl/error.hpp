// Copyright 2026 The RiCL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RICL_ERROR_HPP
#define RICL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ricl {

/// Raised on precondition violations and invalid inputs anywhere in the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration problems. `key()` names the offending entry when there is one.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const { return key_; }

private:
    std::string key_;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) {
        throw Error(what);
    }
}

}  // namespace ricl

#endif
