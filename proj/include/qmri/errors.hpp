// Copyright 2026 The qmri Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qmri {

/// Precondition violated by a caller-supplied argument.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but numerically degenerate (all-zero image, single-element batch stats).
struct DegenerateInput : std::domain_error {
    using std::domain_error::domain_error;
};

/// Operation called in the wrong object state, e.g. backward before forward.
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Malformed file contents (bad magic, dtype, truncated payload, unknown config key).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite values appeared during a computation.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qmri
