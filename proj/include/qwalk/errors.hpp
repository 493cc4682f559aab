#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qwalk {

// Every failure the library reports derives from Error; kind() is the stable
// machine-readable tag the CLI emits in its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define QWALK_DEFINE_ERROR(Name, tag)                                   \
    class Name : public Error {                                         \
    public:                                                             \
        explicit Name(const std::string& what) : Error(tag, what) {}    \
    };

QWALK_DEFINE_ERROR(DomainError, "domain")
QWALK_DEFINE_ERROR(SizeError, "size")
QWALK_DEFINE_ERROR(ResourceError, "resource")
QWALK_DEFINE_ERROR(DegeneracyError, "degeneracy")
QWALK_DEFINE_ERROR(BoundaryLeakError, "boundary_leak")
QWALK_DEFINE_ERROR(InvalidSpecError, "invalid_spec")
QWALK_DEFINE_ERROR(NotSeparableError, "not_separable")
QWALK_DEFINE_ERROR(EmptyDistributionError, "empty_distribution")
QWALK_DEFINE_ERROR(WindowError, "window_exceeds_support")
QWALK_DEFINE_ERROR(ConfigError, "config")
QWALK_DEFINE_ERROR(SchemaError, "schema")

#undef QWALK_DEFINE_ERROR

}  // namespace qwalk
