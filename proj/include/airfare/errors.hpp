#pragma once

#include <stdexcept>
#include <string>

namespace airfare {

/// Pipeline stage a failure is attributed to. Drives CLI exit codes, so the
/// enumerator order is part of the external contract.
enum class Stage { parse = 1, validate, converge, render, io };

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::parse: return "parse";
        case Stage::validate: return "validate";
        case Stage::converge: return "converge";
        case Stage::render: return "render";
        case Stage::io: return "io";
    }
    return "unknown";
}

/// Base of all library errors; carries the stage tag.
class Error : public std::runtime_error {
public:
    Error(Stage stage, const std::string& message)
        : std::runtime_error("[" + std::string(stage_name(stage)) + "] " + message),
          stage_(stage) {}

    Stage stage() const { return stage_; }

private:
    Stage stage_;
};

/// Malformed input text: bad dates, bad numbers, schema mismatches.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error(Stage::parse, message) {}
};

/// Structurally valid input violating a domain invariant or precondition.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message)
        : Error(Stage::validate, message) {}
};

/// Iterative procedure exhausted its budget; carries the last change metric.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, double last_change, int iterations)
        : Error(Stage::converge, message + " (last change " +
                                     std::to_string(last_change) + " after " +
                                     std::to_string(iterations) + " iterations)"),
          last_change_(last_change),
          iterations_(iterations) {}

    double last_change() const { return last_change_; }
    int iterations() const { return iterations_; }

private:
    double last_change_;
    int iterations_;
};

/// Table or record assembly failure (e.g. a layout row no fit supplies).
class RenderError : public Error {
public:
    explicit RenderError(const std::string& message) : Error(Stage::render, message) {}
};

/// Filesystem problems: missing paths, unwritable outputs.
class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(Stage::io, message) {}
};

}  // namespace airfare
