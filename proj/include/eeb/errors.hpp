#ifndef EEB_ERRORS_HPP
#define EEB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eeb {

// Machine-readable failure reasons shared by the library and the CLI.
enum class ErrorCode {
    NonFinite,
    ZeroVector,
    DomainExit,
    StepUnderflow,
    NoCrossing,
    SameTrajectory,
    NeedTwoCrossings,
    ConstructionFailed,
    MultipleEquilibria,
    NoEquilibrium,
    CoincidentEquilibria,
    NonHyperbolic,
    Refused,
    BranchingViolated,
    InvalidArgument,
    SyntaxError,
    UnknownIdentifier,
    UnknownFunction,
    EvalDomain,
    Io,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Parser diagnostics carry the byte offset and what was expected there.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, const std::string& what, std::size_t offset, std::string expected)
        : Error(code, what), offset_(offset), expected_(std::move(expected)) {}
    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

class EvalError : public Error {
public:
    EvalError(const std::string& what, std::size_t offset)
        : Error(ErrorCode::EvalDomain, what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

} // namespace eeb

#endif
