#pragma once

#include <stdexcept>
#include <string>

namespace chs {

// Single exception type for everything the engine rejects. The kind decides
// the CLI exit code: user-facing kinds exit 1, Internal exits 2.
class Error : public std::runtime_error {
public:
    enum class Kind { Parse, Validation, Config, Io, Internal };

    Error(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

}  // namespace chs
