#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bocr {

// Root of every error the library throws. The CLI maps subclasses onto exit
// codes, so new error kinds must derive from one of these.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Caller handed us something that violates a documented precondition
// (dimension mismatch, empty set, zero beam width, ...).
class InvalidInput : public Error {
  public:
    using Error::Error;
};

// CTC target cannot be aligned to the available frames.
class InfeasibleTarget : public Error {
  public:
    InfeasibleTarget(std::size_t frames, std::size_t required)
        : Error("target needs at least " + std::to_string(required) + " frames, got " +
                std::to_string(frames)),
          frames_(frames), required_(required) {}

    std::size_t frames() const { return frames_; }
    std::size_t required() const { return required_; }

  private:
    std::size_t frames_;
    std::size_t required_;
};

class ManifestError : public Error {
  public:
    using Error::Error;
};

class UnsupportedSymbol : public Error {
  public:
    UnsupportedSymbol(char32_t codepoint, std::size_t offset);

    char32_t codepoint() const { return codepoint_; }
    // Byte offset into the UTF-8 input.
    std::size_t offset() const { return offset_; }

  private:
    char32_t codepoint_;
    std::size_t offset_;
};

class IoError : public Error {
  public:
    using Error::Error;
};

// Model file problems.
class FormatError : public Error {
  public:
    using Error::Error;
};
class VersionError : public Error {
  public:
    using Error::Error;
};
class CorruptionError : public Error {
  public:
    using Error::Error;
};

class GenerationError : public Error {
  public:
    using Error::Error;
};

// CA/WA requested over a reference set with no characters or no words.
class UndefinedMetric : public Error {
  public:
    using Error::Error;
};

} // namespace bocr
