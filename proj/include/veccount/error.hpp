// Copyright 2026 The veccount Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace veccount {

enum class errc {
    malformed_code,
    arity_mismatch,
    invalid_param,
    bad_coordinate,
    stream_overflow,
    corrupt_state,
    empty_cover_set,
    budget_exceeded,
    stream_file_error,
};

inline constexpr std::string_view to_string(errc code) noexcept {
    switch (code) {
        case errc::malformed_code: return "MalformedCode";
        case errc::arity_mismatch: return "ArityMismatch";
        case errc::invalid_param: return "InvalidParam";
        case errc::bad_coordinate: return "BadCoordinate";
        case errc::stream_overflow: return "StreamOverflow";
        case errc::corrupt_state: return "CorruptState";
        case errc::empty_cover_set: return "EmptyR";
        case errc::budget_exceeded: return "BudgetExceeded";
        case errc::stream_file_error: return "StreamFileError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace veccount
