#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace muted {

// Input violated a documented invariant. `path` points at the offending
// element in JSON-path style ("tokens[3].end", "head_cls_rows[2]").
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message),
          path_(std::move(path)),
          message_(message) {}

    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string path_;
    std::string message_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No dependency parse was supplied; callers fall back to argument-only output.
class MissingParseError : public std::runtime_error {
public:
    MissingParseError()
        : std::runtime_error(
              "record has no dependency parse; fall back to argument-only output") {}
};

}  // namespace muted
