#pragma once

#include <stdexcept>
#include <string>

namespace bbq {

/// Values double as CLI exit codes.
enum class ErrorCode : int {
    Ok = 0,
    Internal = 1,
    Config = 2,
    NoCrossing = 3,
    Io = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace bbq
