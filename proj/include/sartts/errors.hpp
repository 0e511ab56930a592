#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sartts {

// Base for all domain errors. `name()` is the stable machine-readable
// identifier the CLI prints; `what()` carries the human message.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& msg)
        : std::runtime_error(name + ": " + msg), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define SARTTS_DEFINE_ERROR(Type)                                   \
    class Type : public Error {                                     \
    public:                                                         \
        explicit Type(const std::string& msg) : Error(#Type, msg) {} \
    }

SARTTS_DEFINE_ERROR(DimensionError);
SARTTS_DEFINE_ERROR(EmptyInputError);
SARTTS_DEFINE_ERROR(ZeroNormError);
SARTTS_DEFINE_ERROR(EmptyIndexError);
SARTTS_DEFINE_ERROR(DuplicateIdError);
SARTTS_DEFINE_ERROR(IoError);
SARTTS_DEFINE_ERROR(FormatError);
SARTTS_DEFINE_ERROR(ValidationError);
SARTTS_DEFINE_ERROR(InvalidKError);
SARTTS_DEFINE_ERROR(UnsupportedChannelsError);
SARTTS_DEFINE_ERROR(UnsupportedFormatError);
SARTTS_DEFINE_ERROR(ParameterError);

#undef SARTTS_DEFINE_ERROR

}  // namespace sartts
