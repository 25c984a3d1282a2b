#include "regio/error.hpp"

namespace regio {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Contract: return "contract";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Geometry: return "geometry";
        case ErrorKind::Schema: return "schema";
        case ErrorKind::Estimation: return "estimation";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::NotFound: return "not_found";
        case ErrorKind::Corruption: return "corruption";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Conflict: return "conflict";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

Error& Error::with_stage(std::string stage) {
    stage_ = std::move(stage);
    return *this;
}

Error& Error::with_fields(std::vector<std::string> fields) {
    fields_ = std::move(fields);
    return *this;
}

Error& Error::with_line(long line) {
    line_ = line;
    return *this;
}

Error& Error::with_epoch(long epoch) {
    epoch_ = epoch;
    return *this;
}

void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace regio
