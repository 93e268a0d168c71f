#ifndef DRAM_ORACLE_ERRORS_HPP
#define DRAM_ORACLE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dram_oracle {

// Error classes map onto CLI exit codes: usage=1, io=2, validation=3, numeric=4.
enum class ErrorClass { usage = 1, io = 2, validation = 3, numeric = 4 };

struct Error : std::runtime_error {
    ErrorClass cls;
    Error(ErrorClass c, const std::string& msg) : std::runtime_error(msg), cls(c) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

// File-format failures carry a distinct kind so callers can tell a bad magic
// from a short read or a version bump.
struct IoError : Error {
    enum class Kind { open_failed, bad_magic, unsupported_version, truncated, corrupt, write_failed };
    Kind kind;
    IoError(Kind k, const std::string& msg) : Error(ErrorClass::io, msg), kind(k) {}
};

struct NumericError : Error {
    double detail = 0.0;  // e.g. duality gap on solver non-convergence
    explicit NumericError(const std::string& msg, double d = 0.0)
        : Error(ErrorClass::numeric, msg), detail(d) {}
};

}  // namespace dram_oracle

#endif
