#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace regio {

enum class ErrorKind {
    Contract,
    Parse,
    Geometry,
    Schema,
    Estimation,
    Divergence,
    NotFound,
    Corruption,
    Infeasible,
    Validation,
    Conflict,
};

std::string_view to_string(ErrorKind kind);

// Single error type for the library. Callers branch on kind(); extra context
// (line number, epoch, field paths, stage) is carried alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& stage() const noexcept { return stage_; }
    const std::vector<std::string>& fields() const noexcept { return fields_; }
    long line() const noexcept { return line_; }
    long epoch() const noexcept { return epoch_; }

    Error& with_stage(std::string stage);
    Error& with_fields(std::vector<std::string> fields);
    Error& with_line(long line);
    Error& with_epoch(long epoch);

private:
    ErrorKind kind_;
    std::string stage_;
    std::vector<std::string> fields_;
    long line_ = -1;
    long epoch_ = -1;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, const std::string& message) {
    if (!condition) fail(ErrorKind::Contract, message);
}

}  // namespace regio
