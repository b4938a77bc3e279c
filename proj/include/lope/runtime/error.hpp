#pragma once

#include "lope/diagnostic.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace lope::runtime {

/// Failure while simulating a program. `code` is set for the E2xx errors and
/// for checks that repeat a static rule (E102, E108) at run time.
struct RuntimeError : std::runtime_error {
    RuntimeError(std::optional<ErrorCode> c, std::string message, SourcePos p = {})
        : std::runtime_error(std::move(message)), code(c), pos(std::move(p))
    {
    }
    std::optional<ErrorCode> code;
    SourcePos pos;
};

/// `file:line:col: error[E201]: message`, or `...: error: message` without a code.
std::string format_runtime_error(const RuntimeError& e);

} // namespace lope::runtime
