#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cascade {

// Base for every error raised by the library. Callers that only need to know
// "something in the pipeline failed" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

class ScorerError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class DuplicateKeyword : public Error {
 public:
  explicit DuplicateKeyword(std::string id)
      : Error("duplicate keyword_id: " + id), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& what)
      : Error("malformed record at line " + std::to_string(line) + ": " +
              what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownKeyword : public Error {
 public:
  explicit UnknownKeyword(std::string id)
      : Error("unknown keyword_id: " + id), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

// Every keyword returned for a theme fell outside its candidate set.
class NoKeywordsInSet : public GenerationFailed {
 public:
  NoKeywordsInSet(const std::string& what, std::size_t dropped)
      : GenerationFailed(what), dropped_(dropped) {}
  std::size_t dropped() const noexcept { return dropped_; }

 private:
  std::size_t dropped_;
};

// Machine-readable reason codes for structured-output rejection.
enum class SchemaReason {
  parse_error,
  wrong_count,
  empty_title,
  missing_concepts,
  duplicate_title,
};

const char* to_string(SchemaReason reason) noexcept;

class SchemaViolation : public Error {
 public:
  SchemaViolation(SchemaReason reason, const std::string& detail)
      : Error(std::string("schema violation (") + to_string(reason) +
              "): " + detail),
        reason_(reason) {}
  SchemaReason reason() const noexcept { return reason_; }

 private:
  SchemaReason reason_;
};

class GuardrailExhausted : public Error {
 public:
  using Error::Error;
};

class InvalidFallbackPlan : public Error {
 public:
  using Error::Error;
};

class ZeroBaseline : public Error {
 public:
  ZeroBaseline() : Error("relative lift undefined for a zero control rate") {}
};

class InvalidCounts : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade
