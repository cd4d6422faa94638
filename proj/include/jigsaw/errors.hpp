// Copyright 2026 The JigSaw Project Authors
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

#include <stdexcept>
#include <string>

namespace jigsaw {

/// Bad inputs: malformed bitstrings, out-of-range indices, inconsistent
/// file headers. Maps to CLI exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A Bayesian update produced an empty posterior: the marginal shares no
/// reduced outcome with the prior's support. Maps to CLI exit code 3.
struct DegenerateUpdateError : std::runtime_error {
    explicit DegenerateUpdateError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace jigsaw
