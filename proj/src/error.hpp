#ifndef CLINKD_ERROR_HPP
#define CLINKD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace clinkd {

// Error categories, mirrored 1:1 by the C API status codes in clinkd.h.
enum class Status : int {
    Ok = 0,
    InvalidArg = 1,     // null pointer / bad handle at the C boundary
    InvalidConfig = 2,  // configuration violates an invariant
    InvalidInput = 3,   // data violates an operation precondition
    Parse = 4,          // malformed JSON / unparseable input
    Numeric = 5,        // undefined divergence, non-finite loss, oracle failure
    Backend = 6,        // corrector/scorer backend failure
    Contract = 7,       // a component violated a hard contract (e.g. box mutation)
};

class Error : public std::runtime_error {
public:
    Error(Status status, std::string message)
        : std::runtime_error(std::move(message)), status_(status) {}

    Status status() const { return status_; }

private:
    Status status_;
};

[[noreturn]] inline void fail(Status status, const std::string& message) {
    throw Error(status, message);
}

}  // namespace clinkd

#endif
